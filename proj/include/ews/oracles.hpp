#pragma once

/// Independent references for the closed-form covariance formulas: random
/// spectral models and a brute-force quadrature of the stationary
/// auto-covariance of a finite linear system in its adjoint Jordan basis.
///
/// The adjoint chain vectors are taken as the standard basis, so A* is block
/// upper-bidiagonal with conj(lambda_i) on the diagonal and ones above it.
/// The covariance integral is evaluated with composite Gauss-Legendre panels
/// and a propagated matrix exponential.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "ews/spectral_core.hpp"

namespace ews::oracle {

/// Random spectral model with at most `max_slots` chain slots, eigenvalue real
/// parts in [-3, -0.05] and a positive semi-definite coupling matrix.
inline spectral::SpectralModel random_model(std::mt19937_64& rng, std::size_t max_slots = 8) {
    std::uniform_int_distribution<std::size_t> slots_dist(1, max_slots);
    std::uniform_real_distribution<double> re_dist(-3.0, -0.05);
    std::uniform_real_distribution<double> im_dist(-2.0, 2.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    const std::size_t total = slots_dist(rng);
    std::vector<spectral::JordanBlock> blocks;
    std::size_t used = 0;
    while (used < total) {
        std::uniform_int_distribution<std::size_t> mult_dist(1, std::min<std::size_t>(4, total - used));
        const std::size_t m = mult_dist(rng);
        const double im = unit(rng) < 0.4 ? 0.0 : im_dist(rng);
        blocks.push_back({{re_dist(rng), im}, m});
        used += m;
    }
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.eigenvalue.real() > b.eigenvalue.real(); });

    const auto n = static_cast<Eigen::Index>(total);
    std::uniform_int_distribution<Eigen::Index> rank_dist(1, n);
    const Eigen::Index r = rank_dist(rng);
    Eigen::MatrixXcd b(n, r);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < r; ++k) b(i, k) = {normal(rng), normal(rng)};
    const Eigen::MatrixXcd g = b * b.adjoint();

    std::uniform_real_distribution<double> q_dist(-1.0, 2.0);
    return spectral::SpectralModel(0.0, 1.0, std::move(blocks), q_dist(rng), g);
}



inline Eigen::MatrixXcd adjoint_jordan_matrix(const spectral::SpectralModel& model) {
    const auto n = static_cast<Eigen::Index>(model.slot_count());
    Eigen::MatrixXcd a_star = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t i = 0; i < model.block_count(); ++i) {
        const auto& b = model.block(i);
        for (std::size_t k = 1; k <= b.multiplicity; ++k) {
            const auto s = static_cast<Eigen::Index>(model.slot({i, k}));
            a_star(s, s) = std::conj(b.eigenvalue);
            if (k > 1) a_star(s - 1, s) = 1.0;
        }
    }
    return a_star;
}

/// Matrix of <e*_a, V^tau e*_b> computed by quadrature.
inline Eigen::MatrixXcd quadrature_autocov(const spectral::SpectralModel& model, double tau) {
    using M = Eigen::MatrixXcd;
    const auto n = static_cast<Eigen::Index>(model.slot_count());
    const M a_star = adjoint_jordan_matrix(model);
    const M a = a_star.adjoint();
    const M x = model.coupling().transpose();
    const double q = model.q();
    const M I = M::Identity(n, n);

    double decay = -std::numeric_limits<double>::infinity();
    std::size_t longest = 1;
    for (const auto& b : model.blocks()) {
        decay = std::max(decay, b.eigenvalue.real());
        longest = std::max(longest, b.multiplicity);
    }
    decay = -decay;
    // integrand bound ~ (1+s)^{2 longest} exp(-2 decay s)
    double t_end = 1.0;
    while (2.0 * longest * std::log1p(t_end) - 2.0 * decay * t_end > std::log(1e-17)) t_end *= 1.25;

    // 16-point Gauss-Legendre on [-1, 1]
    static const double xg[8] = {0.0950125098376375, 0.2816035507792589, 0.4580167776572274,
                                 0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                 0.9445750230732326, 0.9894009349916499};
    static const double wg[8] = {0.1894506104550686, 0.1826034150449236, 0.1691565193950026,
                                 0.1495959888165768, 0.1246289712555340, 0.0951585116824926,
                                 0.0622535239386477, 0.0271524594117540};

    double max_freq = 0.0;
    for (const auto& b : model.blocks()) max_freq = std::max(max_freq, std::abs(b.eigenvalue));
    const double h = std::min(0.25, 0.5 / std::max(1.0, max_freq));
    const auto panels = static_cast<long>(std::ceil(t_end / h));

    std::vector<M> node_exp;
    std::vector<double> node_w;
    for (int k = 0; k < 8; ++k) {
        for (int sgn : {-1, 1}) {
            const double xi = 0.5 * h * (1.0 + sgn * xg[k]);
            node_exp.push_back((a * xi).exp());
            node_w.push_back(0.5 * h * wg[k]);
        }
    }
    const M step = (a * h).exp();
    const M left = a - q * I;
    const M right = a_star - q * I;

    M v = M::Zero(n, n);
    M e_start = I;
    for (long pnl = 0; pnl < panels; ++pnl) {
        for (std::size_t m = 0; m < node_exp.size(); ++m) {
            const M e = e_start * node_exp[m];
            v += node_w[m] * (left * e * x * e.adjoint() * right);
        }
        e_start = e_start * step;
    }
    const M v_tau = (a * tau).exp() * v;
    return v_tau.conjugate();
}

}  // namespace ews::oracle
