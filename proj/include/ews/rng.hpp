#pragma once

/// Counter-based random streams keyed by (experiment, p, seed).
///
/// Every draw is a pure function of the key and a 64-bit counter, so a stream
/// can be reproduced or split without shared state between threads.

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace ews {

/// SplitMix64 finaliser applied to key + counter * golden ratio.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

/// Derives the stream key of one simulation run.
std::uint64_t stream_key(std::string_view experiment, double p, std::uint64_t seed);

/// Standard normal draws from a keyed CounterRng.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t key) : rng_(key) {}
    double operator()() { return dist_(rng_); }

private:
    CounterRng rng_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace ews
