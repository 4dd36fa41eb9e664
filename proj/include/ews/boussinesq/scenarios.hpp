#pragma once

/// Steady states and parameter scans of the two reference regimes.

#include <Eigen/Dense>

#include "ews/boussinesq/continuation.hpp"
#include "ews/boussinesq/model.hpp"

namespace ews::bouss {

/// Natural continuation of the state x (steady at `from`) to `to` in equal
/// steps no longer than max_step. Throws NewtonFailure when the branch ends.
Eigen::VectorXd follow_branch(const Model& model, const Eigen::VectorXd& x, double from, double to,
                              double max_step);

/// Thermally dominated symmetric two-cell state of regime 1 at p.
Eigen::VectorXd regime1_thermal_state(const Model& model, double p);

/// Asymmetric single-cell state of regime 1 at p with positive dominant cell,
/// obtained by leaving the thermal state at p_unstable (above the pitchfork)
/// and continuing the attractor back to p.
Eigen::VectorXd regime1_sinking_state(const Model& model, double p, double p_unstable = 0.075);

/// Skewed single-cell state of regime 2 at p with positive dominant cell.
Eigen::VectorXd regime2_skewed_state(const Model& model, double p, double p_start = 0.3);

struct ThresholdResult {
    double p = 0.0;
    double lower = 0.0;  ///< last p with the stable sign
    double upper = 0.0;  ///< first p with the unstable sign
    int bisections = 0;
    Eigen::VectorXd x_lower, x_upper;  ///< steady states at lower and upper
};

/// Locates the zero crossing of a real eigenvalue along the branch through
/// x_lo at p_lo by bisection on the sign of det of the pinned Jacobian.
/// Requires opposite signs at p_lo and p_hi.
ThresholdResult locate_real_crossing(const Model& model, const Eigen::VectorXd& x_lo, double p_lo, double p_hi,
                                     double tol = 1e-5);

}  // namespace ews::bouss
