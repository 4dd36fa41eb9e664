#include "ews/boussinesq/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SparseLU>

#include "ews/boussinesq/newton.hpp"

namespace ews::bouss {

namespace {

Model at_p(const Model& model, double p) {
    BoussinesqParams prm = model.params();
    prm.p = p;
    return Model(model.grid(), prm);
}

Eigen::VectorXd continue_to(const Model& model, const Eigen::VectorXd& x, double from, double to, int steps) {
    if (from == to) return newton_solve(model, x, from).x;
    return follow_branch(model, x, from, to, std::abs(to - from) / steps);
}

double det_sign(const Model& model, const Eigen::VectorXd& x) {
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(pinned_jacobian(model, x));
    if (lu.info() != Eigen::Success) throw NewtonFailure("pinned Jacobian is singular");
    return lu.signDeterminant();
}

}  // namespace

Eigen::VectorXd follow_branch(const Model& model, const Eigen::VectorXd& x, double from, double to,
                              double max_step) {
    if (from == to) return newton_solve(model, x, from).x;
    if (!(max_step > 0.0)) throw std::invalid_argument("step must be positive");
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(to - from) / max_step - 1e-9)));
    std::vector<double> ps;
    for (int k = 0; k <= steps; ++k) ps.push_back(from + (to - from) * k / steps);
    const Branch b = continuation_natural(model, ps, x);
    if (b.fold_detected) throw NewtonFailure("branch ended before the requested parameter");
    return b.points.back().x;
}

Eigen::VectorXd regime1_thermal_state(const Model& model, double p) {
    return homotopy_steady_state(model.grid(), model.params(), p);
}

Eigen::VectorXd regime1_sinking_state(const Model& model, double p, double p_unstable) {
    const Model hot = at_p(model, p_unstable);
    const Eigen::VectorXd th = regime1_thermal_state(model, p_unstable);
    Eigen::VectorXd x = relax_from_kick(hot, th, 0.5, 0.5, 400.0);
    x = orient_dominant_cell(model, x, p_unstable, true);
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(p_unstable - p) / 0.0025)));
    return continue_to(model, x, p_unstable, p, steps);
}

Eigen::VectorXd regime2_skewed_state(const Model& model, double p, double p_start) {
    Eigen::VectorXd x = homotopy_steady_state(model.grid(), model.params(), p_start);
    x = orient_dominant_cell(model, x, p_start, true);
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(p - p_start) / 0.05)));
    return continue_to(model, x, p_start, p, steps);
}

ThresholdResult locate_real_crossing(const Model& model, const Eigen::VectorXd& x_lo, double p_lo, double p_hi,
                                     double tol) {
    ThresholdResult r;
    Eigen::VectorXd x = newton_solve(model, x_lo, p_lo).x;
    const double s_lo = det_sign(model, x);
    Eigen::VectorXd xh = continue_to(model, x, p_lo, p_hi, 4);
    if (det_sign(model, xh) == s_lo) throw std::domain_error("no sign change of the determinant in the interval");
    double lo = p_lo, hi = p_hi;
    r.x_upper = xh;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const Eigen::VectorXd xm = newton_solve(model, x, mid).x;
        if (det_sign(model, xm) == s_lo) {
            lo = mid;
            x = xm;
        } else {
            hi = mid;
            r.x_upper = xm;
        }
        ++r.bisections;
    }
    r.lower = lo;
    r.upper = hi;
    r.x_lower = x;
    r.p = 0.5 * (lo + hi);
    return r;
}

}  // namespace ews::bouss
