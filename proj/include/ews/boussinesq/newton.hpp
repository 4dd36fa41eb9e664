#pragma once

/// Damped Newton iteration for steady states, with the salinity translation
/// mode removed by replacing one salinity equation with the constraint
/// sum_k w_k S_k = target.

#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ews/boussinesq/model.hpp"

namespace ews::bouss {

struct NewtonOptions {
    double tol = 1e-8;
    int max_iter = 40;
    /// Smallest damping factor tried by the backtracking line search.
    double min_damping = 1.0 / 64.0;
};

struct NewtonResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double residual = 0.0;  ///< max-norm of the unpinned residual
};

class NewtonFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Weighted salinity content of a state.
double salinity_content(const Model& model, const Eigen::VectorXd& x);

/// Residual with the pinned row replaced by the salinity constraint.
Eigen::VectorXd pinned_residual(const Model& model, const Eigen::VectorXd& x, double p, double target);
/// Jacobian with the pinned row replaced by the salinity weights.
SparseMatrix pinned_jacobian(const Model& model, const Eigen::VectorXd& x);

/// Converges to a steady state at parameter p. Throws NewtonFailure when the
/// iteration stalls or exceeds max_iter and when the pinned Jacobian is singular.
NewtonResult newton_solve(const Model& model, const Eigen::VectorXd& initial, double p, const NewtonOptions& opt = {});
NewtonResult newton_solve(const Model& model, const Eigen::VectorXd& initial, double p, double salinity_target,
                          const NewtonOptions& opt);

/// Field-level convenience wrapper at the model's p.
StateFields newton_solve(const Model& model, const StateFields& initial, const NewtonOptions& opt = {});

}  // namespace ews::bouss
