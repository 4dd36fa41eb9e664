#pragma once

/// Stochastic time stepping of the full (nonlinear) and linearized models.
///
/// Both systems use a linearly implicit theta step with the Jacobian J frozen
/// at the steady state. The streamfunction rows are algebraic and are solved
/// exactly at every step; the dynamic rows solve
///   (I - theta dt J) dx = dt F(x_n) + sqrt(dt) B eta_n,
/// where F is the full residual for the nonlinear system and J x for the
/// linearized one. theta = 1/2 preserves the stationary covariance of the
/// linearized system for every dt; theta = 1 is linearly implicit Euler. The
/// step matrix is factorized once and shared by every trajectory.

#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ews/boussinesq/model.hpp"

namespace ews::bouss {

using cplx = std::complex<double>;

enum class Field { Omega, T, S };

/// Axis-aligned box [x1_lo, x1_hi] x [x2_lo, x2_hi].
struct Rect {
    double x1_lo, x1_hi, x2_lo, x2_hi;
};

/// Direction in the dynamic space; the recorded value is sum_k W_k v_k conj(d_k).
struct Observable {
    std::string name;
    Eigen::VectorXcd direction;
};

/// Indicator of the nodes of one field inside a box.
Observable indicator_observable(const Model& model, std::string name, Field field, const Rect& box);

struct SimulationOptions {
    double t_end = 1e3;
    std::uint64_t key = 0;
    /// Steps between recorded samples.
    int record_stride = 1;
    /// Salinity anomaly (weighted L2 norm, mean removed) declaring a basin jump.
    double jump_threshold = std::numeric_limits<double>::infinity();
    bool stop_on_jump = false;
};

struct Trajectory {
    double sample_dt = 0.0;
    std::vector<std::string> names;
    std::vector<std::vector<cplx>> series;
    bool jumped = false;
    double jump_time = std::numeric_limits<double>::quiet_NaN();
    double max_salinity_anomaly = 0.0;
    /// Full unknown vector at the end (perturbation for the linearized model).
    Eigen::VectorXd final_state;
};

/// Deterministic linearly implicit Euler integration with the Jacobian
/// refreshed every step, for relaxing an arbitrary state towards an
/// attractor.
Eigen::VectorXd relax(const Model& model, const Eigen::VectorXd& x0, double dt, double t_end);

enum class Scheme { CrankNicolson, ImplicitEuler };

class Stepper {
public:
    Stepper(const Model& model, const Eigen::VectorXd& steady, double dt = 1e-2,
            Scheme scheme = Scheme::CrankNicolson);

    const Model& model() const;
    const Eigen::VectorXd& steady() const;
    double dt() const;
    double theta() const;

    /// System (S2): perturbation dynamics started from zero.
    Trajectory simulate_linearized(const std::vector<Observable>& obs, const SimulationOptions& opt) const;
    /// System (S1): full dynamics started from the steady state.
    Trajectory simulate_nonlinear(const std::vector<Observable>& obs, const SimulationOptions& opt) const;

    /// Weighted L2 norm of the salinity anomaly after removing its mean.
    double salinity_anomaly(const Eigen::VectorXd& dx) const;

private:
    Trajectory run(const std::vector<Observable>& obs, const SimulationOptions& opt, bool linear) const;

    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

}  // namespace ews::bouss
