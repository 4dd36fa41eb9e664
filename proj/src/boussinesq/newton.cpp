#include "ews/boussinesq/newton.hpp"

#include <cmath>
#include <string>

#include <Eigen/SparseLU>

namespace ews::bouss {

using Eigen::Index;

double salinity_content(const Model& model, const Eigen::VectorXd& x) {
    const auto& lay = model.layout();
    return model.salinity_weights().dot(x.segment(lay.S_offset(), lay.n_S()));
}

Eigen::VectorXd pinned_residual(const Model& model, const Eigen::VectorXd& x, double p, double target) {
    Eigen::VectorXd f = model.residual(x, p);
    f[model.pinned_row()] = salinity_content(model, x) - target;
    return f;
}

SparseMatrix pinned_jacobian(const Model& model, const Eigen::VectorXd& x) {
    SparseMatrix j = model.jacobian(x);
    const Index row = model.pinned_row();
    const auto& lay = model.layout();
    const Eigen::VectorXd w = model.salinity_weights();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(j.nonZeros()) + static_cast<std::size_t>(w.size()));
    for (Index c = 0; c < j.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(j, c); it; ++it)
            if (it.row() != row) trip.emplace_back(it.row(), it.col(), it.value());
    for (Index k = 0; k < w.size(); ++k) trip.emplace_back(row, lay.S_offset() + k, w[k]);
    SparseMatrix out(j.rows(), j.cols());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

NewtonResult newton_solve(const Model& model, const Eigen::VectorXd& initial, double p, const NewtonOptions& opt) {
    return newton_solve(model, initial, p, salinity_content(model, initial), opt);
}

NewtonResult newton_solve(const Model& model, const Eigen::VectorXd& initial, double p, double salinity_target,
                          const NewtonOptions& opt) {
    if (!initial.allFinite()) throw std::invalid_argument("initial guess contains non-finite values");
    NewtonResult res;
    res.x = initial;
    const double scale = std::max(1.0, std::abs(salinity_target));
    Eigen::VectorXd f = pinned_residual(model, res.x, p, salinity_target);
    auto converged = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& fp) {
        res.residual = model.residual(x, p).cwiseAbs().maxCoeff();
        return res.residual < opt.tol && std::abs(fp[model.pinned_row()]) < opt.tol * scale;
    };
    Eigen::SparseLU<SparseMatrix> lu;
    for (int it = 0;; ++it) {
        if (converged(res.x, f)) {
            res.iterations = it;
            return res;
        }
        if (it >= opt.max_iter)
            throw NewtonFailure("Newton did not converge in " + std::to_string(opt.max_iter) +
                                " iterations (residual " + std::to_string(res.residual) + ")");
        const SparseMatrix j = pinned_jacobian(model, res.x);
        lu.compute(j);
        if (lu.info() != Eigen::Success) throw NewtonFailure("pinned Jacobian is singular");
        const Eigen::VectorXd dx = lu.solve(-f);
        if (!dx.allFinite()) throw NewtonFailure("Newton step is not finite");
        const double f0 = f.norm();
        double alpha = 1.0;
        Eigen::VectorXd trial, ftrial;
        for (;;) {
            trial = res.x + alpha * dx;
            ftrial = pinned_residual(model, trial, p, salinity_target);
            if (ftrial.allFinite() && ftrial.norm() <= (1.0 - 1e-4 * alpha) * f0) break;
            if (alpha <= opt.min_damping) {
                if (!ftrial.allFinite()) throw NewtonFailure("Newton iterate is not finite");
                break;
            }
            alpha *= 0.5;
        }
        res.x = std::move(trial);
        f = std::move(ftrial);
    }
}

StateFields newton_solve(const Model& model, const StateFields& initial, const NewtonOptions& opt) {
    return model.unpack(newton_solve(model, model.pack(initial), model.params().p, opt).x);
}

}  // namespace ews::bouss
