#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ews/boussinesq/continuation.hpp"
#include "ews/boussinesq/linearization.hpp"
#include "ews/boussinesq/newton.hpp"
#include "ews/boussinesq/scenarios.hpp"
#include "ews/boussinesq/stepping.hpp"
#include "ews/estimators.hpp"

using namespace ews::bouss;
using Eigen::Index;

namespace {

struct Fixture {
    BoussinesqParams params;
    Grid2D grid;
    Model model;
    Eigen::VectorXd steady;

    Fixture(BoussinesqParams prm, int M, int N, double p)
        : params(with_p(prm, p)), grid(build_grid(M, N, prm.L)), model(grid, params),
          steady(homotopy_steady_state(grid, params, p)) {}

    static BoussinesqParams with_p(BoussinesqParams prm, double p) {
        prm.p = p;
        return prm;
    }
};

const Fixture& regime1_small() {
    static const Fixture f(BoussinesqParams::regime1(), 7, 15, 0.03);
    return f;
}

double symmetry_defect(const Eigen::MatrixXd& m) { return (m - m.rowwise().reverse()).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Newton, ConvergedStateNeedsNoIteration) {
    const auto& f = regime1_small();
    const auto r = newton_solve(f.model, f.steady, f.params.p);
    EXPECT_EQ(r.iterations, 0);
    EXPECT_LT(r.residual, 1e-8);
}

TEST(Newton, ThermalStateIsSymmetric) {
    const auto& f = regime1_small();
    const StateFields s = f.model.unpack(f.steady);
    EXPECT_LT(f.model.residual(f.steady).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT(symmetry_defect(s.T), 1e-6);
    EXPECT_LT(symmetry_defect(s.S), 1e-6);
    EXPECT_LT((s.psi + s.psi.rowwise().reverse()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Newton, KeepsSalinityContentAndReportsFailure) {
    const auto& f = regime1_small();
    Eigen::VectorXd x = f.steady;
    x.segment(f.model.layout().S_offset(), f.model.layout().n_S()).array() += 0.7;
    const double target = salinity_content(f.model, x);
    const auto r = newton_solve(f.model, x, f.params.p);
    EXPECT_NEAR(salinity_content(f.model, r.x), target, 1e-9);
    NewtonOptions opt;
    opt.max_iter = 1;
    EXPECT_THROW(newton_solve(f.model, f.model.rest_state(), f.params.p, opt), NewtonFailure);
}

TEST(Continuation, NaturalSinglePointAndValidation) {
    const auto& f = regime1_small();
    const Branch b = continuation_natural(f.model, {f.params.p}, f.steady);
    ASSERT_EQ(b.points.size(), 1u);
    EXPECT_FALSE(b.fold_detected);
    EXPECT_THROW(continuation_natural(f.model, {0.01, 0.02, 0.015}, f.steady), std::invalid_argument);
    EXPECT_THROW(continuation_natural(f.model, {}, f.steady), std::invalid_argument);
}

TEST(Continuation, FollowBranchAcceptsZeroLengthPath) {
    const auto& f = regime1_small();
    const Eigen::VectorXd x = follow_branch(f.model, f.steady, f.params.p, f.params.p, 0.0);
    EXPECT_LT((x - f.steady).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(follow_branch(f.model, f.steady, f.params.p, f.params.p + 0.01, 0.0), std::invalid_argument);
    const Eigen::VectorXd y = follow_branch(f.model, f.steady, f.params.p, f.params.p + 0.004, 0.002);
    EXPECT_LT(f.model.residual(y, f.params.p + 0.004).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Continuation, ArclengthAgreesWithNaturalOnStableSegment) {
    const auto& f = regime1_small();
    ArclengthOptions opt;
    opt.ds_max = 0.05;
    const Branch arc = continuation_arclength(f.model, f.params.p, 0.04, 0.02, f.steady, opt);
    ASSERT_GE(arc.points.size(), 3u);
    EXPECT_FALSE(arc.fold_detected);
    for (std::size_t k = 1; k < arc.points.size(); k += 2) {
        const auto& pt = arc.points[k];
        const auto r = newton_solve(f.model, f.steady, pt.p);
        EXPECT_LT((r.x - pt.x).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_GT(pt.dp_ds, 0.0);
    }
    EXPECT_THROW(continuation_arclength(f.model, f.params.p, 0.04, 0.0, f.steady, opt), std::invalid_argument);
}

TEST(Linearization, SchurMatchesDenseAssembly) {
    const auto& f = regime1_small();
    const SchurComplement schur(assemble_linearization(f.model, f.steady));
    const Eigen::MatrixXd dense = schur.dense();
    const Eigen::MatrixXd by_columns = ews::eig::densify(schur.as_operator());
    EXPECT_LT((dense - by_columns).cwiseAbs().maxCoeff(), 1e-10 * dense.cwiseAbs().maxCoeff());
}

TEST(Linearization, OmegaFreeVectorsSeeOnlyA22) {
    const auto& f = regime1_small();
    const SchurComplement schur(assemble_linearization(f.model, f.steady));
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd v(schur.size());
    for (Index k = 0; k < v.size(); ++k) v[k] = n(rng);
    v.head(f.model.layout().n_omega()).setZero();
    EXPECT_LT((schur.apply(v) - schur.blocks().A22 * v).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Linearization, ConstantSalinityIsAnnihilated) {
    const auto& f = regime1_small();
    const auto& lay = f.model.layout();
    const SchurComplement schur(assemble_linearization(f.model, f.steady));
    Eigen::VectorXd e = Eigen::VectorXd::Zero(schur.size());
    e.segment(lay.S_offset() - lay.n_psi(), lay.n_S()).setOnes();
    EXPECT_LT(schur.apply(e).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Linearization, CouplingBlockVanishesForUniformFields) {
    const auto& f = regime1_small();
    const auto& lay = f.model.layout();
    Eigen::VectorXd x = f.steady;
    x.segment(lay.omega_offset(), lay.n_omega()).setZero();
    x.segment(lay.T_offset(), lay.n_T()).setConstant(0.3);
    x.segment(lay.S_offset(), lay.n_S()).setConstant(-0.2);
    const auto blocks = assemble_linearization(f.model, x);
    EXPECT_EQ(Eigen::MatrixXd(blocks.A21).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT(blocks.steady_residual, 0.0);
}

TEST(Linearization, StructuralZeroOnSteadyState) {
    const auto& f = regime1_small();
    const auto set = steady_spectrum(f.model, f.steady);
    const auto check = check_structural_zero(f.model, set);
    EXPECT_LT(check.eigenvalue_modulus, 1e-8);
    EXPECT_LT(check.direction_deviation, 1e-6);
    for (Index k = 0; k < set.size(); ++k)
        if (k != structural_zero_index(set)) EXPECT_LT(set.values[k].real(), 0.0);
}

TEST(Stepping, ZeroNoiseKeepsEquilibrium) {
    auto prm = regime1_small().params;
    prm.sigma = 0.0;
    const Model quiet(regime1_small().grid, prm);
    const Stepper st(quiet, regime1_small().steady, 1e-2);
    const std::vector<Observable> obs{indicator_observable(quiet, "w", Field::Omega, {-0.5, -0.2, 3.0, 4.0})};
    SimulationOptions opt;
    opt.t_end = 5.0;
    const auto lin = st.simulate_linearized(obs, opt);
    EXPECT_EQ(lin.final_state.cwiseAbs().maxCoeff(), 0.0);
    const auto non = st.simulate_nonlinear(obs, opt);
    EXPECT_LT((non.final_state - regime1_small().steady).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Stepping, SameKeySameTrajectory) {
    const auto& f = regime1_small();
    const Stepper st(f.model, f.steady, 1e-2);
    const std::vector<Observable> obs{indicator_observable(f.model, "T", Field::T, {-0.3, -0.05, 3.0, 9.0})};
    SimulationOptions opt;
    opt.t_end = 2.0;
    opt.key = 99;
    const auto a = st.simulate_nonlinear(obs, opt);
    const auto b = st.simulate_nonlinear(obs, opt);
    opt.key = 100;
    const auto c = st.simulate_nonlinear(obs, opt);
    EXPECT_EQ(a.series[0], b.series[0]);
    EXPECT_NE(a.series[0].back(), c.series[0].back());
    EXPECT_EQ(a.series[0].size(), 201u);
}

namespace {

/// Stationary variance of <g, v> for the theta step on the dynamic unknowns,
/// v' = R v + sqrt(dt) K eta, by doubling.
double stationary_variance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::VectorXd& g, double dt,
                           double theta) {
    const Index n = a.rows();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(id - theta * dt * a);
    Eigen::MatrixXd r = lu.solve(id + (1.0 - theta) * dt * a);
    const Eigen::MatrixXd k = lu.solve(b);
    Eigen::MatrixXd sigma = dt * k * k.transpose();
    for (int d = 0; d < 26; ++d) {
        sigma += r * sigma * r.transpose();
        r = r * r;
    }
    return g.dot(sigma * g);
}

}  // namespace

TEST(Stepping, CrankNicolsonVarianceIsIndependentOfStep) {
    const auto& f = regime1_small();
    const Eigen::MatrixXd a = SchurComplement(assemble_linearization(f.model, f.steady)).dense();
    const Eigen::MatrixXd b = f.model.surface_noise_map();
    const Observable obs = indicator_observable(f.model, "w", Field::Omega, {-0.5, -0.2, 3.0, 4.0});
    const Eigen::VectorXd g = f.model.dynamic_weights().cwiseProduct(obs.direction.real());
    const double fine = stationary_variance(a, b, g, 1e-3, 0.5);
    const double coarse = stationary_variance(a, b, g, 1e-1, 0.5);
    EXPECT_NEAR(coarse / fine, 1.0, 1e-6);
    const double euler = stationary_variance(a, b, g, 1e-1, 1.0);
    EXPECT_GT(std::abs(euler / fine - 1.0), 1e-3);
}

TEST(Stepping, LinearVarianceMatchesDiscreteLyapunov) {
    const auto& f = regime1_small();
    const double dt = 1e-2;
    const Stepper st(f.model, f.steady, dt);
    EXPECT_EQ(st.theta(), 0.5);
    const Observable obs = indicator_observable(f.model, "w", Field::Omega, {-0.5, -0.2, 3.0, 4.0});
    const Eigen::MatrixXd a = SchurComplement(assemble_linearization(f.model, f.steady)).dense();
    const Eigen::VectorXd g = f.model.dynamic_weights().cwiseProduct(obs.direction.real());
    const double exact = stationary_variance(a, f.model.surface_noise_map(), g, dt, st.theta());

    double mean_var = 0.0;
    const int seeds = 4;
    for (int s = 0; s < seeds; ++s) {
        SimulationOptions opt;
        opt.t_end = 1500.0;
        opt.key = 1000 + static_cast<std::uint64_t>(s);
        const auto tr = st.simulate_linearized({obs}, opt);
        const ews::est::ScalarSeries series(tr.sample_dt, tr.series[0]);
        mean_var += ews::est::temporal_autocov(series, series, 0.0).real() / seeds;
    }
    RecordProperty("variance_ratio", std::to_string(mean_var / exact));
    EXPECT_NEAR(mean_var / exact, 1.0, 0.15);
}

TEST(Stepping, LinearizedAndNonlinearAgreeForSmallNoise) {
    auto prm = regime1_small().params;
    prm.sigma = 1e-6;
    const Model m(regime1_small().grid, prm);
    const Observable obs = indicator_observable(m, "T", Field::T, {-0.3, -0.05, 3.0, 9.0});
    SimulationOptions opt;
    opt.t_end = 20.0;
    opt.key = 7;
    for (Scheme sc : {Scheme::CrankNicolson, Scheme::ImplicitEuler}) {
        const Stepper st(m, regime1_small().steady, 1e-2, sc);
        const auto lin = st.simulate_linearized({obs}, opt);
        const auto non = st.simulate_nonlinear({obs}, opt);
        double scale = 0.0, diff = 0.0;
        for (std::size_t k = 0; k < lin.series[0].size(); ++k) {
            scale = std::max(scale, std::abs(lin.series[0][k]));
            diff = std::max(diff, std::abs(lin.series[0][k] - non.series[0][k]));
        }
        EXPECT_GT(scale, 0.0);
        EXPECT_LT(diff, 1e-3 * scale);
    }
}

TEST(Stepping, IndicatorValidation) {
    const auto& f = regime1_small();
    EXPECT_THROW(indicator_observable(f.model, "x", Field::T, {0.5, 0.6, 1.0, 2.0}), std::invalid_argument);
    const Stepper st(f.model, f.steady, 1e-2);
    SimulationOptions opt;
    opt.t_end = -1.0;
    EXPECT_THROW(st.simulate_linearized({}, opt), std::invalid_argument);
}

TEST(BranchSwitching, ReflectionOfSymmetricStateIsItself) {
    const auto& f = regime1_small();
    EXPECT_LT((reflect_state(f.model, f.steady) - f.steady).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_EQ((reflect_state(f.model, reflect_state(f.model, f.steady)) - f.steady).cwiseAbs().maxCoeff(), 0.0);
}
