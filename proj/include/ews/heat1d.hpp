#pragma once

/// One-dimensional heat equation u_t = u_xx + p u on [0, L] with white noise in
/// the boundary data, solved in the eigenbasis of the Neumann or Dirichlet
/// Laplacian.
///
/// Modes are addressed by their position in the truncated basis: position k
/// is wave number k for Neumann (k = 0..K-1) and wave number k + 1 for
/// Dirichlet (k = 0..K-1).

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ews/spectral_core.hpp"

namespace ews::heat {

enum class BoundaryKind { Neumann, Dirichlet };

struct HeatConfig {
    BoundaryKind bc = BoundaryKind::Neumann;
    double length = 1.0;
    double p = -0.1;
    double c = 1.0;  ///< q = p + c
    std::array<double, 2> gains{1.0, 1.0};  ///< noise gains at x = 0 and x = L
    std::size_t modes = 32;

    double q() const { return p + c; }
    /// Value of p at which the leading eigenvalue reaches zero.
    double threshold() const;
    void validate() const;
};

int wavenumber(const HeatConfig& cfg, std::size_t mode);
/// Eigenvalue lambda-hat of -Laplacian for a mode position.
double laplacian_eigenvalue(const HeatConfig& cfg, std::size_t mode);
/// Eigenvalue of A0 = Laplacian + p.
double operator_eigenvalue(const HeatConfig& cfg, std::size_t mode);
/// L2-normalised eigenfunction.
double eigenfunction(const HeatConfig& cfg, std::size_t mode, double x);

/// Solution w of w'' = c w carrying boundary data (v0, vL): derivatives for
/// Neumann, values for Dirichlet.
struct LiftedBoundary {
    double a = 0.0;  ///< coefficient of cosh(s x)
    double b = 0.0;  ///< coefficient of sinh(s x)
    double s = 0.0;  ///< sqrt(c)
    double operator()(double x) const;
    double derivative(double x) const;
};

LiftedBoundary dirichlet_map(const HeatConfig& cfg, double v0, double vL);

/// d_{k,b} = <D chi_b, phi_k> for each mode k and boundary point b.
Eigen::MatrixX2d mode_noise_coeffs(const HeatConfig& cfg);

/// Spectral model with eigenvalues p - lambda-hat_k and coupling
/// G_kl = sum_b g_b^2 d_kb d_lb.
spectral::SpectralModel spectral_model(const HeatConfig& cfg);

/// <phi_i, V^tau phi_j>.
double stationary_cov_entry(const HeatConfig& cfg, std::size_t i, std::size_t j, double tau);

/// <U phi_i, V U phi_j> with U = (-A0)^{alpha/2}.
double weighted_cov_entry(const HeatConfig& cfg, std::size_t i, std::size_t j, double alpha);

/// Partial trace sum_{k < modes} of the stationary covariance. Converges for
/// Neumann data and grows linearly in the number of modes for Dirichlet data.
double wellposedness_integral(const HeatConfig& cfg, std::size_t modes);

struct ModeTrajectory {
    double dt = 0.0;
    std::vector<std::size_t> modes;  ///< recorded mode positions
    Eigen::MatrixXd coeffs;          ///< modes x samples, sample 0 at t = 0
    double time(Eigen::Index k) const { return dt * static_cast<double>(k); }
};

/// Exact Ornstein-Uhlenbeck sampling of the recorded modes from u0 = 0.
/// Only the recorded modes are propagated; their joint law does not depend
/// on the others because the drift is diagonal.
ModeTrajectory simulate_modes(const HeatConfig& cfg, double t_end, double dt, std::uint64_t key,
                              std::vector<std::size_t> record = {});

}  // namespace ews::heat
