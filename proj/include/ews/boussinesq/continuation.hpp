#pragma once

/// Parameter continuation of steady states in p.

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ews/boussinesq/model.hpp"
#include "ews/boussinesq/newton.hpp"
#include "ews/boussinesq/stepping.hpp"

namespace ews::bouss {

struct BranchPoint {
    double p = 0.0;
    Eigen::VectorXd x;
    double max_psi = 0.0;
    double min_psi = 0.0;
    double arclength = 0.0;
    double dp_ds = 1.0;
    /// Leading eigenvalues of the linearization, filled on request.
    Eigen::VectorXcd leading;
    bool stable = true;
};

struct Branch {
    std::vector<BranchPoint> points;
    bool fold_detected = false;
    double fold_p = std::numeric_limits<double>::quiet_NaN();
    std::string stop_reason;
};

/// Steady state at p reached from the conductive state by raising Ra from a
/// small value to its target at p = 0 and then continuing in p.
Eigen::VectorXd homotopy_steady_state(const Grid2D& grid, const BoussinesqParams& params, double p,
                                      const NewtonOptions& opt = {});

/// Reflection x2 -> L - x2 of a packed state (psi, omega odd; T, S even)
/// without any check on the forcing symmetry.
Eigen::VectorXd reflect_state(const Model& model, const Eigen::VectorXd& x);

/// Makes the dominant overturning cell of a steady state at p have the
/// requested sign, by reflecting and re-converging when it does not.
Eigen::VectorXd orient_dominant_cell(const Model& model, const Eigen::VectorXd& x, double p, bool positive,
                                     const NewtonOptions& opt = {});

/// Leaves a steady state along its unstable manifold: adds a single-cell
/// streamfunction perturbation of the given amplitude, relaxes the full
/// dynamics at the model's p until t_end and polishes the result with Newton.
Eigen::VectorXd relax_from_kick(const Model& model, const Eigen::VectorXd& x, double amplitude, double dt,
                                double t_end, const NewtonOptions& opt = {});

struct NaturalOptions {
    NewtonOptions newton;
    /// Smallest sub-step (relative to the requested step) before a fold is declared.
    double min_step_fraction = 1.0 / 64.0;
};

/// Natural continuation along the monotone list p_list. When Newton fails
/// after repeated step halving the branch stops with stop_reason "fold" and
/// fold_p set to the last converged p.
Branch continuation_natural(const Model& model, const std::vector<double>& p_list, const Eigen::VectorXd& initial,
                            const NaturalOptions& opt = {});

struct ArclengthOptions {
    NewtonOptions newton;
    double ds_min = 1e-6;
    double ds_max = 1.0;
    int max_steps = 500;
    int max_corrector_iter = 12;
    /// Continue in the direction of decreasing p when false.
    bool increasing = true;
    double p_min = -std::numeric_limits<double>::infinity();
};

/// Pseudo-arclength continuation from a converged state at p_start until p
/// leaves [p_min, p_max]. The tangent is normalized with the state part scaled
/// by 1/dim, and folds are detected as sign changes of dp/ds with the fold
/// parameter located by a parabola through the neighbouring points.
/// Throws NewtonFailure on step-size underflow.
Branch continuation_arclength(const Model& model, double p_start, double p_max, double ds,
                              const Eigen::VectorXd& initial, const ArclengthOptions& opt = {});

}  // namespace ews::bouss
