#include "ews/rng.hpp"

#include <bit>

namespace ews {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

CounterRng::result_type CounterRng::operator()() {
    ++counter_;
    return splitmix(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
}

std::uint64_t stream_key(std::string_view experiment, double p, std::uint64_t seed) {
    // FNV-1a over the experiment name, then mixed with p and seed
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : experiment) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    h = splitmix(h ^ std::bit_cast<std::uint64_t>(p));
    return splitmix(h ^ (seed * 0xd6e8feb86659fd93ULL));
}

}  // namespace ews
