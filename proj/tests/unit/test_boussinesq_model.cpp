#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ews/boussinesq/fd_ops.hpp"
#include "ews/boussinesq/grid.hpp"
#include "ews/boussinesq/model.hpp"

using namespace ews::bouss;

TEST(Grid, SymmetricAboutMidDepth) {
    const Grid2D g = build_grid(29, 59, 10.0);
    for (int i = 0; i <= 30; ++i) EXPECT_NEAR(g.z[i] + g.z[30 - i], -1.0, 1e-14);
    EXPECT_NEAR(g.z[15], -0.5, 1e-15);
    EXPECT_DOUBLE_EQ(g.z.front(), -1.0);
    EXPECT_DOUBLE_EQ(g.z.back(), 0.0);
}

TEST(Grid, SpacingAndWeights) {
    const Grid2D g = build_grid(19, 39, 5.0);
    for (int i = 0; i <= g.M; ++i) EXPECT_GT(g.h1(i), 0.0);
    EXPECT_LT(g.h1(0), g.h1(g.M / 2));
    EXPECT_LT(g.h1(g.M), g.h1(g.M / 2));
    for (int j = 0; j <= g.N; ++j) EXPECT_NEAR(g.x[j + 1] - g.x[j], 5.0 / 40.0, 1e-14);
    double total = 0.0;
    for (int i = 0; i <= g.M + 1; ++i)
        for (int j = 0; j <= g.N + 1; ++j) {
            EXPECT_GT(g.cell_area(i, j), 0.0);
            total += g.cell_area(i, j);
        }
    EXPECT_NEAR(total, 5.0, 1e-12);
}

TEST(Grid, RejectsBadInput) {
    EXPECT_THROW(build_grid(2, 10, 1.0), std::invalid_argument);
    EXPECT_THROW(build_grid(10, 10, 0.0), std::invalid_argument);
    EXPECT_THROW(forcing_profiles(-0.1, 1.0), std::out_of_range);
}

TEST(Forcing, CentreValuesAndParity) {
    const auto c = forcing_profiles(2.5, 5.0);
    EXPECT_NEAR(c.QS, 3.0, 1e-14);
    EXPECT_NEAR(c.VS, 0.0, 1e-14);
    EXPECT_NEAR(c.TS, 1.0, 1e-14);
    for (double x : {0.3, 1.1, 2.0}) {
        const auto a = forcing_profiles(x, 5.0);
        const auto b = forcing_profiles(5.0 - x, 5.0);
        EXPECT_NEAR(a.QS, b.QS, 1e-14);
        EXPECT_NEAR(a.TS, b.TS, 1e-14);
        EXPECT_NEAR(a.VS, -b.VS, 1e-14);
    }
    double integral = 0.0;
    const int n = 1000;
    for (int k = 0; k <= n; ++k) integral += (k == 0 || k == n ? 0.5 : 1.0) * forcing_profiles(5.0 * k / n, 5.0).QS;
    EXPECT_NEAR(integral * 5.0 / n, 0.0, 1e-12);
}

TEST(FdOps, ExactOnQuadratics) {
    const Grid2D g = build_grid(11, 13, 3.0);
    const FdOps ops = nonuniform_fd_ops(g);
    Eigen::MatrixXd f(g.M + 2, g.N + 2);
    for (int i = 0; i <= g.M + 1; ++i)
        for (int j = 0; j <= g.N + 1; ++j) {
            const double z = g.z[i], x = g.x[j];
            f(i, j) = 1.0 + 2.0 * z - 3.0 * x + 0.5 * z * z + 0.25 * x * x;
        }
    const auto d1 = ops.dx1(f), d2 = ops.dx2(f), lap = ops.laplacian(f);
    for (int i = 1; i <= g.M; ++i)
        for (int j = 1; j <= g.N; ++j) {
            EXPECT_NEAR(d1(i, j), 2.0 + g.z[i], 1e-11);
            EXPECT_NEAR(d2(i, j), -3.0 + 0.5 * g.x[j], 1e-11);
            EXPECT_NEAR(lap(i, j), 1.5, 1e-9);
        }
}

TEST(FdOps, SecondOrderInUniformDirection) {
    std::vector<double> h, err;
    for (int N : {15, 31, 63, 127}) {
        const Grid2D g = build_grid(5, N, 4.0);
        const FdOps ops(g);
        Eigen::MatrixXd f(g.M + 2, g.N + 2);
        for (int i = 0; i <= g.M + 1; ++i)
            for (int j = 0; j <= g.N + 1; ++j) f(i, j) = std::sin(std::numbers::pi * g.x[j] / 4.0);
        const auto lap = ops.laplacian(f);
        double e = 0.0;
        const double k2 = std::pow(std::numbers::pi / 4.0, 2);
        for (int i = 1; i <= g.M; ++i)
            for (int j = 1; j <= g.N; ++j) e = std::max(e, std::abs(lap(i, j) + k2 * f(i, j)));
        h.push_back(g.dx2);
        err.push_back(e);
    }
    for (std::size_t k = 1; k < h.size(); ++k) {
        const double slope = std::log(err[k - 1] / err[k]) / std::log(h[k - 1] / h[k]);
        EXPECT_NEAR(slope, 2.0, 0.1);
    }
}

namespace {

Model small_model(BoussinesqParams params) {
    return Model(build_grid(7, 11, params.L), params);
}

Eigen::VectorXd random_state(const Model& m, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd x = m.rest_state();
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] += scale * n(rng);
    return x;
}

}  // namespace

TEST(BoussinesqModel, PackUnpackRoundTrip) {
    for (auto params : {BoussinesqParams::regime1(), BoussinesqParams::regime2()}) {
        const Model m = small_model(params);
        const Eigen::VectorXd x = random_state(m, 3, 0.1);
        EXPECT_EQ((m.pack(m.unpack(x)) - x).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(BoussinesqModel, RestStateHasNoAdvectionResidual) {
    auto params = BoussinesqParams::regime1();
    params.p = 0.0;
    const Model m = small_model(params);
    const Eigen::VectorXd x = m.rest_state();
    const Eigen::VectorXd f = m.residual(x);
    // With zero flow the residual is the linear part only; salinity rows vanish at p = 0.
    const auto& lay = m.layout();
    EXPECT_LT(f.segment(lay.S_offset(), lay.n_S()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT(f.head(lay.n_psi()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(BoussinesqModel, JacobianMatchesFiniteDifferences) {
    for (auto params : {BoussinesqParams::regime1(), BoussinesqParams::regime2()}) {
        params.p = 0.3;
        const Model m = small_model(params);
        const Eigen::VectorXd x = random_state(m, 11, 0.5);
        const Eigen::VectorXd v = random_state(m, 12, 1.0) - m.rest_state();
        const Eigen::VectorXd jv = m.jacobian(x) * v;
        const Eigen::VectorXd f0 = m.residual(x);
        std::vector<double> errs;
        for (double eps : {1e-2, 1e-3, 1e-4}) {
            const Eigen::VectorXd fd = (m.residual(x + eps * v) - f0) / eps;
            errs.push_back((fd - jv).norm() / jv.norm());
        }
        // The residual is quadratic, so the forward difference error is exactly linear in eps.
        EXPECT_NEAR(std::log10(errs[0] / errs[1]), 1.0, 0.05);
        EXPECT_NEAR(std::log10(errs[1] / errs[2]), 1.0, 0.05);
        EXPECT_LT(errs[2], 1e-4);
    }
}

TEST(BoussinesqModel, SaltIsConservedByInteriorTerms) {
    auto params = BoussinesqParams::regime2();
    params.p = 0.7;
    const Model m = small_model(params);
    const auto& lay = m.layout();
    const Eigen::VectorXd w = m.salinity_weights();
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Eigen::VectorXd f = m.residual(random_state(m, seed, 1.0));
        EXPECT_NEAR(w.dot(f.segment(lay.S_offset(), lay.n_S())), 0.0, 1e-11);
    }
}

TEST(BoussinesqModel, ConstantSalinityIsInTheNullSpace) {
    const Model m = small_model(BoussinesqParams::regime1());
    const auto& lay = m.layout();
    const Eigen::VectorXd x = random_state(m, 5, 0.3);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(lay.total());
    e.segment(lay.S_offset(), lay.n_S()).setOnes();
    EXPECT_LT((m.jacobian(x) * e).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BoussinesqModel, MirrorIsAnInvolutionAndPreservesResidualNorm) {
    auto params = BoussinesqParams::regime1();
    params.p = 0.05;
    const Model m = small_model(params);
    const Eigen::VectorXd x = random_state(m, 9, 0.2);
    const StateFields s = m.unpack(x);
    const StateFields back = mirror_solution(mirror_solution(s, params), params);
    EXPECT_EQ((back.psi - s.psi).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((back.S - s.S).cwiseAbs().maxCoeff(), 0.0);
    const StateFields r = m.unpack(m.residual(x));
    const StateFields rm = m.unpack(m.residual(m.pack(mirror_solution(s, params))));
    EXPECT_LT((rm.omega + r.omega.rowwise().reverse()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((rm.S - r.S.rowwise().reverse()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((rm.T - r.T.rowwise().reverse()).cwiseAbs().maxCoeff(), 1e-9);

    params.nu = 0.1;
    EXPECT_THROW(mirror_solution(s, params), std::invalid_argument);
}

TEST(BoussinesqModel, NoiseMapActsOnSurfaceSalinityOnly) {
    const Model m = small_model(BoussinesqParams::regime1());
    const Eigen::MatrixXd b = m.surface_noise_map();
    const auto& lay = m.layout();
    EXPECT_EQ(b.rows(), lay.dynamic_size());
    EXPECT_EQ(b.cols(), m.grid().N + 2);
    for (int j = 0; j <= m.grid().N + 1; ++j) {
        const Eigen::Index r = lay.S(m.grid().M + 1, j) - lay.n_psi();
        EXPECT_NE(b(r, j), 0.0);
        EXPECT_EQ(b.col(j).cwiseAbs().sum(), std::abs(b(r, j)));
    }
}
