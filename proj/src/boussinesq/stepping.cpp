#include "ews/boussinesq/stepping.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SparseLU>

#include "ews/rng.hpp"

namespace ews::bouss {

using Eigen::Index;

Observable indicator_observable(const Model& model, std::string name, Field field, const Rect& box) {
    const auto& g = model.grid();
    const auto& lay = model.layout();
    Observable o;
    o.name = std::move(name);
    o.direction = Eigen::VectorXcd::Zero(lay.dynamic_size());
    for (int i = 0; i <= g.M + 1; ++i) {
        const double z = g.z[static_cast<std::size_t>(i)];
        if (z < box.x1_lo || z > box.x1_hi) continue;
        for (int j = 0; j <= g.N + 1; ++j) {
            const double x = g.x[static_cast<std::size_t>(j)];
            if (x < box.x2_lo || x > box.x2_hi) continue;
            const Index k = field == Field::Omega ? lay.omega(i, j) : field == Field::T ? lay.T(i, j) : lay.S(i, j);
            if (k >= 0) o.direction[k - lay.n_psi()] = 1.0;
        }
    }
    if (o.direction.cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("indicator box contains no nodes");
    return o;
}

struct Stepper::Impl {
    const Model* model;
    Eigen::VectorXd steady;
    double dt;
    double theta;
    SparseMatrix jac;
    Eigen::SparseLU<SparseMatrix> lu;
    SparseMatrix noise;  ///< dynamic rows shifted to full layout, one column per channel
    Eigen::VectorXd s_weights;
    double s_weight_sum;
};

namespace {

/// Rows of the streamfunction block equal -J, dynamic rows equal I - c J.
SparseMatrix step_matrix(const SparseMatrix& j, Index n_psi, double c) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(j.nonZeros() + j.rows()));
    for (Index col = 0; col < j.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(j, col); it; ++it)
            trip.emplace_back(it.row(), it.col(), it.row() < n_psi ? -it.value() : -c * it.value());
    for (Index k = n_psi; k < j.rows(); ++k) trip.emplace_back(k, k, 1.0);
    SparseMatrix s(j.rows(), j.cols());
    s.setFromTriplets(trip.begin(), trip.end());
    return s;
}

}  // namespace

Stepper::Stepper(const Model& model, const Eigen::VectorXd& steady, double dt, Scheme scheme) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    auto impl = std::make_shared<Impl>();
    impl->model = &model;
    impl->steady = steady;
    impl->dt = dt;
    impl->theta = scheme == Scheme::CrankNicolson ? 0.5 : 1.0;
    const auto& lay = model.layout();
    const Index n = lay.total();
    const Index np = lay.n_psi();
    impl->jac = model.jacobian(steady);
    impl->lu.compute(step_matrix(impl->jac, np, impl->theta * dt));
    if (impl->lu.info() != Eigen::Success) throw std::runtime_error("factorization of the step matrix failed");

    const Eigen::MatrixXd b = model.surface_noise_map();
    std::vector<Eigen::Triplet<double>> nt;
    for (Index c = 0; c < b.cols(); ++c)
        for (Index r = 0; r < b.rows(); ++r)
            if (b(r, c) != 0.0) nt.emplace_back(r + np, c, b(r, c));
    impl->noise.resize(n, b.cols());
    impl->noise.setFromTriplets(nt.begin(), nt.end());
    impl->s_weights = model.salinity_weights();
    impl->s_weight_sum = impl->s_weights.sum();
    impl_ = std::move(impl);
}

const Model& Stepper::model() const { return *impl_->model; }
const Eigen::VectorXd& Stepper::steady() const { return impl_->steady; }
double Stepper::dt() const { return impl_->dt; }
double Stepper::theta() const { return impl_->theta; }

double Stepper::salinity_anomaly(const Eigen::VectorXd& dx) const {
    const auto& lay = impl_->model->layout();
    const auto s = dx.segment(lay.S_offset(), lay.n_S());
    const double mean = impl_->s_weights.dot(s) / impl_->s_weight_sum;
    return std::sqrt(impl_->s_weights.dot((s.array() - mean).square().matrix()));
}

namespace {

struct Recorder {
    const std::vector<Observable>& obs;
    Eigen::VectorXd weights;
    Trajectory& traj;

    void record(const Eigen::VectorXd& dx) {
        const auto v = dx.tail(weights.size());
        for (std::size_t k = 0; k < obs.size(); ++k) {
            cplx acc{0.0, 0.0};
            const auto& d = obs[k].direction;
            for (Index i = 0; i < v.size(); ++i)
                if (d[i] != cplx{0.0, 0.0}) acc += weights[i] * v[i] * std::conj(d[i]);
            traj.series[k].push_back(acc);
        }
    }
};

}  // namespace

Trajectory Stepper::simulate_linearized(const std::vector<Observable>& obs, const SimulationOptions& opt) const {
    return run(obs, opt, true);
}

Trajectory Stepper::simulate_nonlinear(const std::vector<Observable>& obs, const SimulationOptions& opt) const {
    return run(obs, opt, false);
}

Trajectory Stepper::run(const std::vector<Observable>& obs, const SimulationOptions& opt, bool linear) const {
    if (!(opt.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    if (opt.record_stride < 1) throw std::invalid_argument("record stride must be at least one");
    const Impl& s = *impl_;
    const Model& model = *s.model;
    const auto& lay = model.layout();
    const Index np = lay.n_psi();
    for (const auto& o : obs)
        if (o.direction.size() != lay.dynamic_size()) throw std::invalid_argument("observable has the wrong size");

    Trajectory traj;
    traj.sample_dt = s.dt * opt.record_stride;
    for (const auto& o : obs) traj.names.push_back(o.name);
    traj.series.resize(obs.size());
    const auto steps = static_cast<long>(std::llround(opt.t_end / s.dt));
    for (auto& ser : traj.series) ser.reserve(static_cast<std::size_t>(steps / opt.record_stride + 1));
    Recorder rec{obs, model.dynamic_weights(), traj};

    NormalStream normal(opt.key);
    const double sq = std::sqrt(s.dt);
    Eigen::VectorXd eta(s.noise.cols());
    Eigen::VectorXd x = linear ? Eigen::VectorXd::Zero(lay.total()) : s.steady;
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(lay.total());
    Eigen::VectorXd rhs(lay.total());
    rec.record(dx);
    for (long n = 1; n <= steps; ++n) {
        for (Index c = 0; c < eta.size(); ++c) eta[c] = normal();
        const Eigen::VectorXd f = linear ? Eigen::VectorXd(s.jac * x) : model.residual(x);
        rhs.head(np) = f.head(np);
        rhs.tail(rhs.size() - np) = s.dt * f.tail(rhs.size() - np);
        rhs += sq * (s.noise * eta);
        x += s.lu.solve(rhs);
        dx = linear ? x : Eigen::VectorXd(x - s.steady);
        if (!x.allFinite()) throw std::runtime_error("time stepping blew up");
        if (n % opt.record_stride == 0) {
            rec.record(dx);
            const double a = salinity_anomaly(dx);
            traj.max_salinity_anomaly = std::max(traj.max_salinity_anomaly, a);
            if (!traj.jumped && a > opt.jump_threshold) {
                traj.jumped = true;
                traj.jump_time = n * s.dt;
                if (opt.stop_on_jump) break;
            }
        }
    }
    traj.final_state = x;
    return traj;
}

Eigen::VectorXd relax(const Model& model, const Eigen::VectorXd& x0, double dt, double t_end) {
    const auto& lay = model.layout();
    if (x0.size() != lay.total()) throw std::invalid_argument("state vector has the wrong size");
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    const Index np = lay.n_psi();
    Eigen::SparseLU<SparseMatrix> lu;
    Eigen::VectorXd x = x0;
    const auto steps = static_cast<long>(std::llround(t_end / dt));
    for (long k = 0; k < steps; ++k) {
        lu.compute(step_matrix(model.jacobian(x), np, dt));
        if (lu.info() != Eigen::Success) throw std::runtime_error("factorization of the step matrix failed");
        Eigen::VectorXd rhs = model.residual(x);
        rhs.tail(rhs.size() - np) *= dt;
        x += lu.solve(rhs);
        if (!x.allFinite()) throw std::runtime_error("time stepping blew up");
    }
    return x;
}

}  // namespace ews::bouss
