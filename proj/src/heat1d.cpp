#include "ews/heat1d.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ews/rng.hpp"

namespace ews::heat {

using std::numbers::pi;

double HeatConfig::threshold() const {
    return bc == BoundaryKind::Neumann ? 0.0 : (pi / length) * (pi / length);
}

void HeatConfig::validate() const {
    if (!(length > 0.0)) throw std::invalid_argument("domain length must be positive");
    if (!(c > 0.0)) throw std::invalid_argument("shift c must be positive");
    if (modes == 0) throw std::invalid_argument("need at least one mode");
    if (!(p < threshold())) throw std::invalid_argument("p must lie below the threshold");
}

int wavenumber(const HeatConfig& cfg, std::size_t mode) {
    return static_cast<int>(mode) + (cfg.bc == BoundaryKind::Dirichlet ? 1 : 0);
}

double laplacian_eigenvalue(const HeatConfig& cfg, std::size_t mode) {
    const double mu = wavenumber(cfg, mode) * pi / cfg.length;
    return mu * mu;
}

double operator_eigenvalue(const HeatConfig& cfg, std::size_t mode) {
    return cfg.p - laplacian_eigenvalue(cfg, mode);
}

double eigenfunction(const HeatConfig& cfg, std::size_t mode, double x) {
    const int k = wavenumber(cfg, mode);
    const double mu = k * pi / cfg.length;
    if (cfg.bc == BoundaryKind::Neumann) {
        if (k == 0) return 1.0 / std::sqrt(cfg.length);
        return std::sqrt(2.0 / cfg.length) * std::cos(mu * x);
    }
    return std::sqrt(2.0 / cfg.length) * std::sin(mu * x);
}

double LiftedBoundary::operator()(double x) const { return a * std::cosh(s * x) + b * std::sinh(s * x); }

double LiftedBoundary::derivative(double x) const {
    return s * (a * std::sinh(s * x) + b * std::cosh(s * x));
}

LiftedBoundary dirichlet_map(const HeatConfig& cfg, double v0, double vL) {
    LiftedBoundary w;
    w.s = std::sqrt(cfg.c);
    const double sl = w.s * cfg.length;
    if (cfg.bc == BoundaryKind::Neumann) {
        w.b = v0 / w.s;
        w.a = (vL / w.s - w.b * std::cosh(sl)) / std::sinh(sl);
    } else {
        w.a = v0;
        w.b = (vL - v0 * std::cosh(sl)) / std::sinh(sl);
    }
    return w;
}

namespace {

/// Integral over [0, L] of w(x) phi_k(x) using closed-form hyperbolic-trigonometric integrals.
double project_lifted(const HeatConfig& cfg, const LiftedBoundary& w, std::size_t mode) {
    const int k = wavenumber(cfg, mode);
    const double L = cfg.length;
    const double s = w.s;
    const double mu = k * pi / L;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const double den = s * s + mu * mu;
    const double ch = std::cosh(s * L);
    const double sh = std::sinh(s * L);
    if (cfg.bc == BoundaryKind::Neumann) {
        const double int_cosh = s * sh * sign / den;
        const double int_sinh = s * (sign * ch - 1.0) / den;
        const double norm = (k == 0) ? 1.0 / std::sqrt(L) : std::sqrt(2.0 / L);
        return norm * (w.a * int_cosh + w.b * int_sinh);
    }
    const double int_cosh = -mu * (sign * ch - 1.0) / den;
    const double int_sinh = -mu * sign * sh / den;
    return std::sqrt(2.0 / L) * (w.a * int_cosh + w.b * int_sinh);
}

}  // namespace

Eigen::MatrixX2d mode_noise_coeffs(const HeatConfig& cfg) {
    const auto K = static_cast<Eigen::Index>(cfg.modes);
    Eigen::MatrixX2d d(K, 2);
    const LiftedBoundary left = dirichlet_map(cfg, 1.0, 0.0);
    const LiftedBoundary right = dirichlet_map(cfg, 0.0, 1.0);
    for (Eigen::Index k = 0; k < K; ++k) {
        d(k, 0) = project_lifted(cfg, left, static_cast<std::size_t>(k));
        d(k, 1) = project_lifted(cfg, right, static_cast<std::size_t>(k));
    }
    return d;
}

spectral::SpectralModel spectral_model(const HeatConfig& cfg) {
    cfg.validate();
    const Eigen::MatrixX2d d = mode_noise_coeffs(cfg);
    const Eigen::Vector2d g2(cfg.gains[0] * cfg.gains[0], cfg.gains[1] * cfg.gains[1]);
    const Eigen::MatrixXd G = d * g2.asDiagonal() * d.transpose();
    std::vector<spectral::JordanBlock> blocks;
    for (std::size_t k = 0; k < cfg.modes; ++k) blocks.push_back({{operator_eigenvalue(cfg, k), 0.0}, 1});
    return spectral::SpectralModel(cfg.p, cfg.threshold(), std::move(blocks), cfg.q(), G.cast<spectral::cplx>());
}

double stationary_cov_entry(const HeatConfig& cfg, std::size_t i, std::size_t j, double tau) {
    if (i >= cfg.modes || j >= cfg.modes) throw std::out_of_range("mode index beyond truncation");
    if (tau < 0.0) throw std::invalid_argument("lag must be non-negative");
    return spectral::autocov_pair(spectral_model(cfg), i, j, tau).real();
}

double weighted_cov_entry(const HeatConfig& cfg, std::size_t i, std::size_t j, double alpha) {
    const double wi = laplacian_eigenvalue(cfg, i) - cfg.p;
    const double wj = laplacian_eigenvalue(cfg, j) - cfg.p;
    return std::pow(wi * wj, 0.5 * alpha) * stationary_cov_entry(cfg, i, j, 0.0);
}

double wellposedness_integral(const HeatConfig& cfg, std::size_t modes) {
    HeatConfig big = cfg;
    big.modes = modes;
    big.validate();
    const Eigen::MatrixX2d d = mode_noise_coeffs(big);
    double sum = 0.0;
    for (std::size_t k = 0; k < modes; ++k) {
        const double lh = laplacian_eigenvalue(big, k);
        const double beta2 = d(static_cast<Eigen::Index>(k), 0) * d(static_cast<Eigen::Index>(k), 0) *
                                 cfg.gains[0] * cfg.gains[0] +
                             d(static_cast<Eigen::Index>(k), 1) * d(static_cast<Eigen::Index>(k), 1) *
                                 cfg.gains[1] * cfg.gains[1];
        sum += (cfg.c + lh) * (cfg.c + lh) * beta2 / (2.0 * (lh - cfg.p));
    }
    return sum;
}

ModeTrajectory simulate_modes(const HeatConfig& cfg, double t_end, double dt, std::uint64_t key,
                              std::vector<std::size_t> record) {
    cfg.validate();
    if (!(dt > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("time step and horizon must be positive");
    if (record.empty())
        for (std::size_t k = 0; k < cfg.modes; ++k) record.push_back(k);
    for (auto k : record)
        if (k >= cfg.modes) throw std::out_of_range("recorded mode beyond truncation");

    const auto m = static_cast<Eigen::Index>(record.size());
    const Eigen::MatrixX2d d = mode_noise_coeffs(cfg);
    Eigen::VectorXd lam(m), decay(m);
    Eigen::MatrixX2d beta(m, 2);
    for (Eigen::Index r = 0; r < m; ++r) {
        const auto k = record[static_cast<std::size_t>(r)];
        lam[r] = operator_eigenvalue(cfg, k);
        decay[r] = std::exp(lam[r] * dt);
        const double amp = cfg.c + laplacian_eigenvalue(cfg, k);
        beta(r, 0) = amp * d(static_cast<Eigen::Index>(k), 0) * cfg.gains[0];
        beta(r, 1) = amp * d(static_cast<Eigen::Index>(k), 1) * cfg.gains[1];
    }
    // covariance of the stochastic convolution over one step
    Eigen::MatrixXd Q(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b) {
            const double s = lam[a] + lam[b];
            Q(a, b) = beta.row(a).dot(beta.row(b)) * std::expm1(s * dt) / s;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
    const Eigen::MatrixXd root =
        es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

    const auto steps = static_cast<Eigen::Index>(std::llround(t_end / dt));
    ModeTrajectory traj;
    traj.dt = dt;
    traj.modes = record;
    traj.coeffs.setZero(m, steps + 1);
    NormalStream normal(key);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m), xi(m);
    for (Eigen::Index n = 1; n <= steps; ++n) {
        for (Eigen::Index r = 0; r < m; ++r) xi[r] = normal();
        u = decay.cwiseProduct(u) + root * xi;
        traj.coeffs.col(n) = u;
    }
    return traj;
}

}  // namespace ews::heat
