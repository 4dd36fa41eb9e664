#include "ews/boussinesq/continuation.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SparseLU>

namespace ews::bouss {

using Eigen::Index;

namespace {

BranchPoint make_point(const Model& model, double p, const Eigen::VectorXd& x) {
    BranchPoint bp;
    bp.p = p;
    bp.x = x;
    const auto psi = x.head(model.layout().n_psi());
    bp.max_psi = psi.maxCoeff();
    bp.min_psi = psi.minCoeff();
    return bp;
}

/// Advances a converged state from p_from to p_to, halving the step on
/// Newton failure. Returns false when the step falls below min_step.
bool advance(const Model& model, Eigen::VectorXd& x, double p_from, double p_to, double min_step,
             const NewtonOptions& opt) {
    double p = p_from;
    double h = p_to - p_from;
    while (p != p_to) {
        const double target = std::abs(p_to - p) <= std::abs(h) ? p_to : p + h;
        try {
            x = newton_solve(model, x, target, opt).x;
            p = target;
            h *= 1.5;
        } catch (const NewtonFailure&) {
            h *= 0.5;
            if (std::abs(h) < min_step) return false;
        }
    }
    return true;
}

}  // namespace

Eigen::VectorXd homotopy_steady_state(const Grid2D& grid, const BoussinesqParams& params, double p,
                                      const NewtonOptions& opt) {
    BoussinesqParams stage = params;
    stage.p = 0.0;
    double log_ra = std::log10(std::min(10.0, params.Ra));
    const double log_target = std::log10(params.Ra);
    stage.Ra = std::pow(10.0, log_ra);
    Eigen::VectorXd x = Model(grid, stage).rest_state();
    x = newton_solve(Model(grid, stage), x, 0.0, opt).x;
    double step = 0.5;
    while (log_ra < log_target) {
        const double next = std::min(log_target, log_ra + step);
        stage.Ra = std::pow(10.0, next);
        try {
            x = newton_solve(Model(grid, stage), x, 0.0, opt).x;
            log_ra = next;
            step *= 1.5;
        } catch (const NewtonFailure&) {
            step *= 0.5;
            if (step < 1e-4) throw NewtonFailure("Rayleigh number homotopy stalled");
        }
    }
    stage.Ra = params.Ra;
    const Model model(grid, stage);
    if (p != 0.0 && !advance(model, x, 0.0, p, 1e-6 * std::max(1.0, std::abs(p)), opt))
        throw NewtonFailure("continuation in p stalled before the target");
    return x;
}

Eigen::VectorXd reflect_state(const Model& model, const Eigen::VectorXd& x) {
    const StateFields s = model.unpack(x);
    StateFields r;
    r.psi = -s.psi.rowwise().reverse();
    r.omega = -s.omega.rowwise().reverse();
    r.T = s.T.rowwise().reverse();
    r.S = s.S.rowwise().reverse();
    return model.pack(r);
}

Eigen::VectorXd orient_dominant_cell(const Model& model, const Eigen::VectorXd& x, double p, bool positive,
                                     const NewtonOptions& opt) {
    const auto psi = x.head(model.layout().n_psi());
    const bool is_positive = psi.maxCoeff() >= -psi.minCoeff();
    if (is_positive == positive) return x;
    return newton_solve(model, reflect_state(model, x), p, opt).x;
}

Eigen::VectorXd relax_from_kick(const Model& model, const Eigen::VectorXd& x, double amplitude, double dt,
                                double t_end, const NewtonOptions& opt) {
    const auto& g = model.grid();
    StateFields s = model.unpack(x);
    for (int i = 1; i <= g.M; ++i)
        for (int j = 1; j <= g.N; ++j)
            s.psi(i, j) += amplitude * std::sin(std::numbers::pi * (g.z[static_cast<std::size_t>(i)] + g.H) / g.H) *
                           std::sin(std::numbers::pi * g.x[static_cast<std::size_t>(j)] / g.L);
    const Eigen::VectorXd y = relax(model, model.pack(s), dt, t_end);
    return newton_solve(model, y, model.params().p, opt).x;
}

Branch continuation_natural(const Model& model, const std::vector<double>& p_list, const Eigen::VectorXd& initial,
                            const NaturalOptions& opt) {
    if (p_list.empty()) throw std::invalid_argument("empty parameter list");
    for (std::size_t k = 2; k < p_list.size(); ++k)
        if ((p_list[k] - p_list[k - 1]) * (p_list[1] - p_list[0]) <= 0.0)
            throw std::invalid_argument("parameter list must be strictly monotone");
    Branch branch;
    Eigen::VectorXd x = newton_solve(model, initial, p_list.front(), opt.newton).x;
    branch.points.push_back(make_point(model, p_list.front(), x));
    for (std::size_t k = 1; k < p_list.size(); ++k) {
        const double step = std::abs(p_list[k] - p_list[k - 1]);
        if (!advance(model, x, p_list[k - 1], p_list[k], opt.min_step_fraction * step, opt.newton)) {
            branch.stop_reason = "fold";
            branch.fold_detected = true;
            branch.fold_p = branch.points.back().p;
            return branch;
        }
        branch.points.push_back(make_point(model, p_list[k], x));
    }
    branch.stop_reason = "end of parameter list";
    return branch;
}

namespace {

/// [[J_pin, F_p], [theta t_x^T, t_p]] as a sparse matrix.
SparseMatrix bordered(const Model& model, const Eigen::VectorXd& x, const Eigen::VectorXd& tx, double tp,
                      double theta) {
    const SparseMatrix j = pinned_jacobian(model, x);
    const Index n = j.rows();
    Eigen::VectorXd fp = model.residual_p_derivative();
    fp[model.pinned_row()] = 0.0;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(j.nonZeros() + 2 * n + 1));
    for (Index c = 0; c < j.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(j, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (Index k = 0; k < n; ++k) {
        if (fp[k] != 0.0) trip.emplace_back(k, n, fp[k]);
        if (tx[k] != 0.0) trip.emplace_back(n, k, theta * tx[k]);
    }
    trip.emplace_back(n, n, tp);
    SparseMatrix a(n + 1, n + 1);
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

double parabola_vertex(double s0, double p0, double s1, double p1, double s2, double p2) {
    const double d1 = (p1 - p0) / (s1 - s0);
    const double d2 = (p2 - p1) / (s2 - s1);
    const double a = (d2 - d1) / (s2 - s0);
    if (a == 0.0) return p1;
    const double b = d1 - a * (s0 + s1);
    const double s = -b / (2.0 * a);
    return p0 + (d1 + a * (s - s1)) * (s - s0);
}

}  // namespace

Branch continuation_arclength(const Model& model, double p_start, double p_max, double ds,
                              const Eigen::VectorXd& initial, const ArclengthOptions& opt) {
    if (!(ds > 0.0)) throw std::invalid_argument("arclength step must be positive");
    const double target = salinity_content(model, initial);
    Eigen::VectorXd x = newton_solve(model, initial, p_start, target, opt.newton).x;
    double p = p_start;
    const Index n = x.size();
    const double theta = 1.0 / static_cast<double>(n);

    Eigen::SparseLU<SparseMatrix> lu;
    Eigen::VectorXd tx;
    double tp;
    {
        const SparseMatrix j = pinned_jacobian(model, x);
        lu.compute(j);
        if (lu.info() != Eigen::Success) throw NewtonFailure("singular Jacobian at the start of the branch");
        Eigen::VectorXd fp = model.residual_p_derivative();
        fp[model.pinned_row()] = 0.0;
        tx = lu.solve(-fp);
        tp = 1.0;
        const double norm = std::sqrt(theta * tx.squaredNorm() + 1.0);
        tx /= norm;
        tp /= norm;
        if (!opt.increasing) {
            tx = -tx;
            tp = -tp;
        }
    }

    Branch branch;
    BranchPoint first = make_point(model, p, x);
    first.dp_ds = tp;
    branch.points.push_back(first);
    double s = 0.0;
    double h = std::min(ds, opt.ds_max);
    const double scale = std::max(1.0, std::abs(target));

    for (int step = 0; step < opt.max_steps; ++step) {
        Eigen::VectorXd xn;
        double pn = 0.0;
        int iters = 0;
        bool ok = false;
        while (!ok) {
            xn = x + h * tx;
            pn = p + h * tp;
            for (iters = 0; iters < opt.max_corrector_iter; ++iters) {
                const Eigen::VectorXd f = pinned_residual(model, xn, pn, target);
                const double g = theta * tx.dot(xn - x) + tp * (pn - p) - h;
                if (!f.allFinite()) break;
                const double fres = model.residual(xn, pn).cwiseAbs().maxCoeff();
                if (fres < opt.newton.tol && std::abs(f[model.pinned_row()]) < opt.newton.tol * scale &&
                    std::abs(g) < 1e-10 * std::max(1.0, h)) {
                    ok = true;
                    break;
                }
                lu.compute(bordered(model, xn, tx, tp, theta));
                if (lu.info() != Eigen::Success) break;
                Eigen::VectorXd rhs(n + 1);
                rhs.head(n) = -f;
                rhs[n] = -g;
                const Eigen::VectorXd d = lu.solve(rhs);
                if (!d.allFinite()) break;
                xn += d.head(n);
                pn += d[n];
            }
            if (!ok) {
                h *= 0.5;
                if (h < opt.ds_min) throw NewtonFailure("arclength step-size underflow");
            }
        }

        // New tangent, oriented consistently with the previous one.
        lu.compute(bordered(model, xn, tx, tp, theta));
        if (lu.info() != Eigen::Success) throw NewtonFailure("singular bordered system");
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
        rhs[n] = 1.0;
        const Eigen::VectorXd t = lu.solve(rhs);
        const double norm = std::sqrt(theta * t.head(n).squaredNorm() + t[n] * t[n]);
        const Eigen::VectorXd txn = t.head(n) / norm;
        const double tpn = t[n] / norm;

        s += h;
        BranchPoint bp = make_point(model, pn, xn);
        bp.arclength = s;
        bp.dp_ds = tpn;
        branch.points.push_back(bp);
        if (!branch.fold_detected && tpn * tp < 0.0) {
            branch.fold_detected = true;
            const auto& pts = branch.points;
            const std::size_t k = pts.size() - 1;
            if (k >= 2)
                branch.fold_p = parabola_vertex(pts[k - 2].arclength, pts[k - 2].p, pts[k - 1].arclength,
                                                pts[k - 1].p, pts[k].arclength, pts[k].p);
            else
                branch.fold_p = std::max(pts[k].p, pts[k - 1].p);
        }
        x = xn;
        p = pn;
        tx = txn;
        tp = tpn;
        if (p > p_max || p < opt.p_min) {
            branch.stop_reason = "parameter range left";
            return branch;
        }
        if (iters <= 3) h = std::min(1.5 * h, opt.ds_max);
    }
    branch.stop_reason = "step limit";
    return branch;
}

}  // namespace ews::bouss
