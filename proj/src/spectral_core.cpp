#include "ews/spectral_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>

namespace ews::spectral {

namespace {

constexpr double kDenominatorFloor = 1e-14;

double factorial(std::size_t n) {
    double r = 1.0;
    for (std::size_t k = 2; k <= n; ++k) r *= static_cast<double>(k);
    return r;
}

}  // namespace

SpectralModel::SpectralModel(double p, double threshold, std::vector<JordanBlock> blocks, double q,
                             Eigen::MatrixXcd coupling)
    : p_(p), threshold_(threshold), blocks_(std::move(blocks)), q_(q), coupling_(std::move(coupling)) {
    offsets_.reserve(blocks_.size());
    for (const auto& b : blocks_) {
        if (b.multiplicity == 0) throw std::invalid_argument("Jordan block of multiplicity zero");
        offsets_.push_back(slot_count_);
        slot_count_ += b.multiplicity;
    }
    if (coupling_.rows() != static_cast<Eigen::Index>(slot_count_) ||
        coupling_.cols() != static_cast<Eigen::Index>(slot_count_))
        throw std::invalid_argument("coupling matrix size does not match the number of chain slots");
}

const JordanBlock& SpectralModel::block(std::size_t i) const {
    if (i >= blocks_.size()) throw std::out_of_range("block index out of range");
    return blocks_[i];
}

std::size_t SpectralModel::slot(SlotIndex s) const {
    const auto& b = block(s.block);
    if (s.level < 1 || s.level > b.multiplicity) throw std::out_of_range("chain level out of range");
    return offsets_[s.block] + s.level - 1;
}

cplx SpectralModel::coupling_at(SlotIndex a, SlotIndex b) const {
    if (a.level == 0 || b.level == 0) return {0.0, 0.0};
    return coupling_(static_cast<Eigen::Index>(slot(a)), static_cast<Eigen::Index>(slot(b)));
}

void SpectralModel::validate() const {
    for (std::size_t i = 1; i < blocks_.size(); ++i) {
        if (blocks_[i].eigenvalue.real() > blocks_[i - 1].eigenvalue.real())
            throw std::invalid_argument("eigenvalues must be sorted by descending real part");
    }
    const double scale = std::max(1.0, coupling_.cwiseAbs().maxCoeff());
    if ((coupling_ - coupling_.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("coupling matrix is not Hermitian");
    if (slot_count_ > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (coupling_ + coupling_.adjoint()),
                                                           Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10 * scale)
            throw std::invalid_argument("coupling matrix is not positive semi-definite");
    }
    for (const auto& b : blocks_) {
        if (std::abs(b.eigenvalue - q_) <= kDenominatorFloor)
            throw std::invalid_argument("q lies on the spectrum");
        if (p_ < threshold_ && b.eigenvalue.real() >= 0.0)
            throw std::invalid_argument("eigenvalue with non-negative real part below threshold");
    }
}

cplx DirectionCoeffs::get(SlotIndex s) const {
    auto it = coeffs.find(s);
    return it == coeffs.end() ? cplx{0.0, 0.0} : it->second;
}

AutocovEvaluator::AutocovEvaluator(const SpectralModel& model) : model_(model) {}

std::size_t AutocovEvaluator::KeyHash::operator()(const Key& k) const {
    std::size_t h = std::hash<std::size_t>{}(k.i);
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    mix(k.k1);
    mix(k.j);
    mix(k.k2);
    mix(std::bit_cast<std::uint64_t>(k.tau));
    return h;
}

/// e^{conj(l_i) tau} sum_k tau^{k1-k}/(k1-k)! <(conj(l_i)-q) e*_{i,k} + e*_{i,k-1}, X ((conj(l_j)-q) e*_{j,k2} + e*_{j,k2-1})>
cplx AutocovEvaluator::forcing(std::size_t i, std::size_t k1, std::size_t j, std::size_t k2,
                               double tau) const {
    const double q = model_.q();
    const cplx li = std::conj(model_.block(i).eigenvalue);
    const cplx lj = std::conj(model_.block(j).eigenvalue);
    const cplx bj_top = lj - q;

    auto right = [&](std::size_t k) {
        // <e*_{i,k}, X ((conj(l_j)-q) e*_{j,k2} + e*_{j,k2-1})>, conjugate-linear in the second slot
        return std::conj(bj_top) * model_.coupling_at({i, k}, {j, k2}) +
               model_.coupling_at({i, k}, {j, k2 - 1});
    };

    cplx sum{0.0, 0.0};
    for (std::size_t k = 1; k <= k1; ++k) {
        const cplx inner = (li - q) * right(k) + right(k - 1);
        sum += std::pow(tau, static_cast<double>(k1 - k)) / factorial(k1 - k) * inner;
    }
    return std::exp(li * tau) * sum;
}

cplx AutocovEvaluator::jordan(SlotIndex a, SlotIndex b, double tau) {
    if (a.level == 0 || b.level == 0) return {0.0, 0.0};
    (void)model_.slot(a);
    (void)model_.slot(b);

    const Key key{a.block, a.level, b.block, b.level, tau};
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    const cplx denom = std::conj(model_.block(a.block).eigenvalue) + model_.block(b.block).eigenvalue;
    if (std::abs(denom) <= kDenominatorFloor)
        throw DegenerateDenominator("conj(lambda_i) + lambda_j vanishes");

    const cplx lower = jordan({a.block, a.level}, {b.block, b.level - 1}, tau) +
                       jordan({a.block, a.level - 1}, {b.block, b.level}, tau);
    const cplx value = -(lower + forcing(a.block, a.level, b.block, b.level, tau)) / denom;
    cache_.emplace(key, value);
    return value;
}

cplx autocov_pair(const SpectralModel& model, std::size_t i, std::size_t j, double tau) {
    const cplx li = std::conj(model.block(i).eigenvalue);
    const cplx lj = model.block(j).eigenvalue;
    const cplx denom = li + lj;
    if (std::abs(denom) <= kDenominatorFloor)
        throw DegenerateDenominator("conj(lambda_i) + lambda_j vanishes");
    const double q = model.q();
    return -(li - q) * (lj - q) / denom * std::exp(li * tau) * model.coupling_at({i, 1}, {j, 1});
}

cplx autocov_jordan(const SpectralModel& model, SlotIndex a, SlotIndex b, double tau) {
    AutocovEvaluator eval(model);
    return eval.jordan(a, b, tau);
}

Eigen::MatrixXcd autocov_matrix(const SpectralModel& model, double tau) {
    const auto n = static_cast<Eigen::Index>(model.slot_count());
    Eigen::MatrixXcd out(n, n);
    AutocovEvaluator eval(model);
    for (std::size_t i = 0; i < model.block_count(); ++i)
        for (std::size_t k1 = 1; k1 <= model.block(i).multiplicity; ++k1)
            for (std::size_t j = 0; j < model.block_count(); ++j)
                for (std::size_t k2 = 1; k2 <= model.block(j).multiplicity; ++k2)
                    out(static_cast<Eigen::Index>(model.slot({i, k1})),
                        static_cast<Eigen::Index>(model.slot({j, k2}))) = eval.jordan({i, k1}, {j, k2}, tau);
    return out;
}

cplx autocov_subspace(const DirectionCoeffs& f1, const DirectionCoeffs& f2, double tau,
                      const SpectralModel& model) {
    AutocovEvaluator eval(model);
    cplx sum{0.0, 0.0};
    for (const auto& [s1, c1] : f1.coeffs) {
        if (c1 == cplx{0.0, 0.0}) continue;
        for (const auto& [s2, c2] : f2.coeffs) {
            if (c2 == cplx{0.0, 0.0}) continue;
            sum += c1 * eval.jordan(s1, s2, tau) * std::conj(c2);
        }
    }
    return sum;
}

int predicted_exponent_pair(std::size_t k1, std::size_t k2) {
    if (k1 < 1 || k2 < 1) throw std::out_of_range("chain levels start at 1");
    return -static_cast<int>(k1) - static_cast<int>(k2) + 1;
}

namespace {

std::size_t top_leading_level(const DirectionCoeffs& f, const SpectralModel& model) {
    std::size_t top = 0;
    for (std::size_t k = 1; k <= model.block(0).multiplicity; ++k)
        if (f.get({0, k}) != cplx{0.0, 0.0}) top = k;
    return top;
}

}  // namespace

int predicted_exponent_directions(const DirectionCoeffs& f1, const DirectionCoeffs& f2,
                                  const SpectralModel& model) {
    const std::size_t k1 = top_leading_level(f1, model);
    const std::size_t k2 = top_leading_level(f2, model);
    if (k1 == 0 || k2 == 0)
        throw SilencedSign("direction has no component on the leading eigenvalue");
    return predicted_exponent_pair(k1, k2);
}

cplx autocorr_asymptotic(const SpectralModel& model, std::size_t i, double tau) {
    return std::exp(std::conj(model.block(i).eigenvalue) * tau);
}

DirectionCoeffs densify_direction(const DirectionCoeffs& f, double delta, double norm_of_top,
                                  const SpectralModel& model) {
    if (delta <= 0.0) throw std::invalid_argument("delta must be positive");
    if (norm_of_top <= 0.0) throw std::invalid_argument("norm of the top chain vector must be positive");
    const SlotIndex top{0, model.block(0).multiplicity};
    DirectionCoeffs out = f;
    if (out.get(top) == cplx{0.0, 0.0}) out.set(top, delta / (4.0 * norm_of_top));
    return out;
}

ScalingFit fit_scaling_exponent(std::span<const ScalingSample> samples) {
    if (samples.size() < 2) throw std::invalid_argument("need at least two samples to fit a slope");
    std::vector<double> x, y;
    x.reserve(samples.size());
    y.reserve(samples.size());
    for (const auto& s : samples) {
        if (!(s.value > 0.0) || !(s.rate > 0.0))
            throw std::domain_error("scaling fit needs positive values and rates");
        x.push_back(std::log10(s.rate));
        y.push_back(std::log10(s.value));
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (sxx <= 1e-300) throw std::domain_error("scaling fit needs distinct rates");
    ScalingFit fit;
    fit.exponent = sxy / sxx;
    fit.offset = my - fit.exponent * mx;
    double ss = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double r = y[k] - (fit.exponent * x[k] + fit.offset);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

}  // namespace ews::spectral
