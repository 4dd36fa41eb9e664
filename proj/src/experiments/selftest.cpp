#include <cmath>
#include <random>
#include <stdexcept>

#include "ews/experiments.hpp"
#include "ews/oracles.hpp"
#include "ews/spectral_core.hpp"

namespace ews::exp {

using spectral::DirectionCoeffs;
using spectral::JordanBlock;
using spectral::SpectralModel;

void SelftestConfig::validate() const {
    if (models < 1) throw std::invalid_argument("selftest needs at least one model");
    if (max_slots < 1) throw std::invalid_argument("selftest needs at least one slot");
    if (taus.empty()) throw std::invalid_argument("selftest needs at least one lag");
    for (double t : taus)
        if (!(t >= 0.0)) throw std::invalid_argument("lags must be non-negative");
    if (distances.size() < 2) throw std::invalid_argument("exponent fit needs at least two distances");
    for (double d : distances)
        if (!(d > 0.0)) throw std::invalid_argument("distances must be positive");
}

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

Eigen::MatrixXcd random_psd(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXcd b(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k) b(i, k) = {normal(rng), normal(rng)};
    return b * b.adjoint();
}

struct Family {
    std::string name;
    std::vector<JordanBlock> blocks;  ///< leading eigenvalue offset; p is added to its real part
    Eigen::MatrixXcd coupling;
};

/// Member of a family whose leading eigenvalue sits at distance d below the
/// threshold 0.
SpectralModel family_member(const Family& fam, double d) {
    auto blocks = fam.blocks;
    for (auto& b : blocks)
        if (b.eigenvalue.real() == 0.0) b.eigenvalue -= d;
    SpectralModel m(-d, 0.0, blocks, 1.0, fam.coupling);
    m.validate();
    return m;
}

/// Fitted divergence exponent of |<f, V g>| along a family.
double fit_family(const Family& fam, const std::vector<double>& distances, const DirectionCoeffs& f,
                  const DirectionCoeffs& g) {
    std::vector<spectral::ScalingSample> samples;
    for (double d : distances)
        samples.push_back({-d, std::abs(spectral::autocov_subspace(f, g, 0.0, family_member(fam, d))), d});
    return spectral::fit_scaling_exponent(samples).exponent;
}

}  // namespace

SelftestResult spectral_selftest(const SelftestConfig& cfg) {
    cfg.validate();
    SelftestResult res;
    std::mt19937_64 rng(cfg.seed);
    for (int k = 0; k < cfg.models; ++k) {
        const SpectralModel model = oracle::random_model(rng, cfg.max_slots);
        model.validate();
        for (double tau : cfg.taus) {
            const Eigen::MatrixXcd exact = oracle::quadrature_autocov(model, tau);
            const Eigen::MatrixXcd rec = spectral::autocov_matrix(model, tau);
            const double err = max_abs(rec - exact) / max_abs(exact);
            res.oracle.push_back({k, model.slot_count(), tau, err});
            res.max_oracle_error = std::max(res.max_oracle_error, err);
        }
        const double q = model.q();
        for (std::size_t i = 0; i < model.block_count(); ++i)
            for (std::size_t j = 0; j < model.block_count(); ++j) {
                const cplx li = std::conj(model.block(i).eigenvalue);
                const cplx lj = model.block(j).eigenvalue;
                const cplx lhs = (li + lj) * spectral::autocov_pair(model, i, j, 0.0);
                const cplx rhs = (li - q) * (lj - q) * model.coupling_at({i, 1}, {j, 1});
                const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
                const double r = std::abs(lhs + rhs) / scale;
                res.lyapunov.push_back({k, i, j, r});
                res.max_lyapunov_residual = std::max(res.max_lyapunov_residual, r);
            }
    }

    std::mt19937_64 grng(cfg.seed + 1);
    const std::vector<Family> families{
        {"real-simple", {{{0.0, 0.0}, 1}, {{-1.0, 0.0}, 1}}, random_psd(grng, 2)},
        {"complex-simple", {{{0.0, 0.8}, 1}, {{-1.0, 0.3}, 1}}, random_psd(grng, 2)},
        {"jordan-2", {{{0.0, 0.0}, 2}, {{-1.0, 0.0}, 1}}, random_psd(grng, 3)},
        {"jordan-3", {{{0.0, 0.0}, 3}, {{-1.0, 0.0}, 1}}, random_psd(grng, 4)},
    };
    auto unit = [](std::size_t level) {
        DirectionCoeffs d;
        d.set({0, level}, 1.0);
        return d;
    };
    for (const auto& fam : families) {
        const std::size_t chain = fam.blocks.front().multiplicity;
        for (std::size_t k1 = 1; k1 <= chain; ++k1)
            for (std::size_t k2 = k1; k2 <= chain; ++k2) {
                const int predicted = spectral::predicted_exponent_pair(k1, k2);
                const double fitted = fit_family(fam, cfg.distances, unit(k1), unit(k2));
                res.exponents.push_back({fam.name + " <" + std::to_string(k1) + "|" + std::to_string(k2) + ">",
                                         chain, predicted, fitted});
            }
        // A generic direction with components on every chain level and on the
        // second block diverges at the top-level rate.
        DirectionCoeffs mixed;
        for (std::size_t k = 1; k <= chain; ++k) mixed.set({0, k}, cplx(1.0, 0.5 * static_cast<double>(k)));
        mixed.set({1, 1}, 2.0);
        const int predicted = spectral::predicted_exponent_directions(
            mixed, mixed, family_member(fam, cfg.distances.front()));
        res.exponents.push_back({fam.name + " mixed", chain, predicted,
                                 fit_family(fam, cfg.distances, mixed, mixed)});
    }
    for (const auto& e : res.exponents)
        res.max_exponent_error = std::max(res.max_exponent_error, std::abs(e.fitted - e.predicted));
    return res;
}

}  // namespace ews::exp
