#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ews/oracles.hpp"
#include "ews/spectral_core.hpp"

using namespace ews::spectral;
using ews::oracle::quadrature_autocov;
using ews::oracle::random_model;

namespace {

SpectralModel scalar_model(cplx lambda, double q, double g) {
    Eigen::MatrixXcd G(1, 1);
    G(0, 0) = g;
    return SpectralModel(0.0, 1.0, {{lambda, 1}}, q, G);
}

SpectralModel single_chain(double lambda, std::size_t m, double q) {
    return SpectralModel(0.0, 1.0, {{{lambda, 0.0}, m}}, q, Eigen::MatrixXcd::Identity(m, m));
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(SpectralCore, ScalarPairFrozenValue) {
    const auto model = scalar_model({-1.0, 0.0}, 0.0, 1.0);
    const cplx v = autocov_pair(model, 0, 0, 0.0);
    EXPECT_NEAR(v.real(), 0.5, 1e-15);
    EXPECT_NEAR(v.imag(), 0.0, 1e-15);
}

TEST(SpectralCore, ComplexConjugatePairFrozenValue) {
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Ones(2, 2);
    const SpectralModel model(0.0, 1.0, {{{-1.0, 1.0}, 1}, {{-1.0, -1.0}, 1}}, 0.0, G);
    const cplx v = autocov_pair(model, 0, 1, 0.0);
    EXPECT_NEAR(v.real(), 0.5, 1e-15);
    EXPECT_NEAR(v.imag(), 0.5, 1e-15);
}

TEST(SpectralCore, LaggedScalarDecaysWithConjugateEigenvalue) {
    const auto model = scalar_model({-1.0, 2.0}, 0.0, 1.0);
    const cplx v0 = autocov_pair(model, 0, 0, 0.0);
    const cplx v1 = autocov_pair(model, 0, 0, 1.5);
    const cplx expected = v0 * std::exp(cplx{-1.0, -2.0} * 1.5);
    EXPECT_NEAR(std::abs(v1 - expected), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(autocorr_asymptotic(model, 0, 1.5) - std::exp(cplx{-1.0, -2.0} * 1.5)), 0.0, 1e-15);
}

TEST(SpectralCore, JordanChainOfLengthTwoFrozenValues) {
    // Hand-integrated: A e^{As} = e^{-s} [[-1, 0], [1 - s, -1]] for lambda = -1.
    const auto model = single_chain(-1.0, 2, 0.0);
    EXPECT_NEAR(autocov_jordan(model, {0, 1}, {0, 1}, 0.0).real(), 0.5, 1e-15);
    EXPECT_NEAR(autocov_jordan(model, {0, 1}, {0, 2}, 0.0).real(), -0.25, 1e-15);
    EXPECT_NEAR(autocov_jordan(model, {0, 2}, {0, 1}, 0.0).real(), -0.25, 1e-15);
    EXPECT_NEAR(autocov_jordan(model, {0, 2}, {0, 2}, 0.0).real(), 0.75, 1e-15);
}

TEST(SpectralCore, JordanRecursionMatchesQuadratureOnRandomModels) {
    std::mt19937_64 rng(20240611);
    for (int trial = 0; trial < 12; ++trial) {
        const auto model = random_model(rng, 6);
        model.validate();
        for (double tau : {0.0, 0.7}) {
            const Eigen::MatrixXcd exact = quadrature_autocov(model, tau);
            const Eigen::MatrixXcd rec = autocov_matrix(model, tau);
            EXPECT_LE(max_abs(rec - exact), 1e-8 * max_abs(exact)) << "trial " << trial << " tau " << tau;
        }
    }
}

TEST(SpectralCore, PairFormulaAgreesWithRecursionAtLevelOne) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto model = random_model(rng);
        for (std::size_t i = 0; i < model.block_count(); ++i)
            for (std::size_t j = 0; j < model.block_count(); ++j) {
                const cplx a = autocov_pair(model, i, j, 0.3);
                const cplx b = autocov_jordan(model, {i, 1}, {j, 1}, 0.3);
                EXPECT_LE(std::abs(a - b), 1e-13 * std::max(1.0, std::abs(a)));
            }
    }
}

TEST(SpectralCore, ZeroLagMatrixIsHermitian) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto model = random_model(rng);
        const Eigen::MatrixXcd v = autocov_matrix(model, 0.0);
        EXPECT_LE(max_abs(v - v.adjoint()), 1e-12 * max_abs(v));
    }
}

TEST(SpectralCore, PairSatisfiesLyapunovIdentity) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const auto model = random_model(rng);
        const double q = model.q();
        for (std::size_t i = 0; i < model.block_count(); ++i)
            for (std::size_t j = 0; j < model.block_count(); ++j) {
                const cplx li = std::conj(model.block(i).eigenvalue);
                const cplx lj = model.block(j).eigenvalue;
                const cplx lhs = (li + lj) * autocov_pair(model, i, j, 0.0);
                const cplx rhs = (li - q) * (lj - q) * model.coupling_at({i, 1}, {j, 1});
                EXPECT_LE(std::abs(lhs + rhs), 1e-12 * std::max(std::abs(rhs), 1e-300));
            }
    }
}

TEST(SpectralCore, HigherLevelsApproachLeadingTermNearThreshold) {
    // Leading term (-1)^{k1+k2} binom(k1+k2-2, k1-1) V11 (2 lambda)^{-k1-k2+2}.
    const double lambda = -1e-4;
    const auto model = single_chain(lambda, 4, 1.0);
    const cplx v11 = autocov_jordan(model, {0, 1}, {0, 1}, 0.0);
    for (std::size_t k1 = 1; k1 <= 4; ++k1)
        for (std::size_t k2 = 1; k2 <= 4; ++k2) {
            const double binom = std::tgamma(k1 + k2 - 1.0) / (std::tgamma(k1 + 0.0) * std::tgamma(k2 + 0.0));
            const double sign = ((k1 + k2) % 2 == 0) ? 1.0 : -1.0;
            const cplx lead = sign * binom * v11 * std::pow(2.0 * lambda, -static_cast<double>(k1 + k2) + 2.0);
            const cplx v = autocov_jordan(model, {0, k1}, {0, k2}, 0.0);
            EXPECT_LE(std::abs(v - lead), 1e-2 * std::abs(lead)) << k1 << "," << k2;
        }
}

TEST(SpectralCore, MemoisationReusesLowerLevels) {
    const auto model = single_chain(-0.5, 5, 0.0);
    AutocovEvaluator eval(model);
    (void)eval.jordan({0, 5}, {0, 5}, 0.0);
    EXPECT_EQ(eval.cache_size(), 25u);
    (void)eval.jordan({0, 3}, {0, 4}, 0.0);
    EXPECT_EQ(eval.cache_size(), 25u);
}

TEST(SpectralCore, SubspaceIsSesquilinear) {
    std::mt19937_64 rng(17);
    const auto model = random_model(rng);
    DirectionCoeffs f, g;
    f.set({0, 1}, {0.3, -1.2});
    g.set({0, 1}, {1.0, 0.5});
    if (model.block_count() > 1) g.set({1, 1}, {-0.2, 0.1});
    const cplx a{0.7, 2.0};
    DirectionCoeffs fa = f, ga = g;
    for (auto& [s, c] : fa.coeffs) c *= a;
    for (auto& [s, c] : ga.coeffs) c *= a;
    const cplx base = autocov_subspace(f, g, 0.4, model);
    EXPECT_LE(std::abs(autocov_subspace(fa, g, 0.4, model) - a * base), 1e-12 * std::abs(a * base));
    EXPECT_LE(std::abs(autocov_subspace(f, ga, 0.4, model) - std::conj(a) * base), 1e-12 * std::abs(a * base));
}

TEST(SpectralCore, PredictedExponents) {
    EXPECT_EQ(predicted_exponent_pair(1, 1), -1);
    EXPECT_EQ(predicted_exponent_pair(2, 3), -4);
    const auto model = single_chain(-0.1, 3, 0.0);
    DirectionCoeffs f, g;
    f.set({0, 1}, 1.0);
    f.set({0, 3}, 0.5);
    g.set({0, 2}, 1.0);
    EXPECT_EQ(predicted_exponent_directions(f, g, model), -4);
    DirectionCoeffs silent;
    EXPECT_THROW(predicted_exponent_directions(f, silent, model), SilencedSign);
    EXPECT_THROW(predicted_exponent_pair(0, 1), std::out_of_range);
}

TEST(SpectralCore, DensifyAddsTopLevelOnlyWhenMissing) {
    const auto model = single_chain(-0.1, 3, 0.0);
    DirectionCoeffs f;
    f.set({0, 1}, 1.0);
    const auto d = densify_direction(f, 0.2, 2.0, model);
    EXPECT_NEAR(std::abs(d.get({0, 3})), 0.2 / 8.0, 1e-15);
    EXPECT_EQ(d.get({0, 1}), cplx(1.0));
    EXPECT_EQ(predicted_exponent_directions(d, d, model), -5);
    const auto again = densify_direction(d, 0.2, 2.0, model);
    EXPECT_EQ(again.get({0, 3}), d.get({0, 3}));
}

TEST(SpectralCore, ScalingFitRecoversPowerLaw) {
    std::vector<ScalingSample> s;
    for (double r : {1e-1, 1e-2, 1e-3}) s.push_back({0.0, 3.0 * std::pow(r, -1.6), r});
    const auto fit = fit_scaling_exponent(s);
    EXPECT_NEAR(fit.exponent, -1.6, 1e-12);
    EXPECT_NEAR(fit.offset, std::log10(3.0), 1e-12);
    EXPECT_NEAR(fit.residual, 0.0, 1e-12);
}

TEST(SpectralCore, ScalingFitRejectsBadInput) {
    std::vector<ScalingSample> zero_rate{{0.0, 1.0, 0.0}, {0.0, 2.0, 1.0}};
    EXPECT_THROW(fit_scaling_exponent(zero_rate), std::domain_error);
    std::vector<ScalingSample> same{{0.0, 1.0, 0.5}, {0.0, 2.0, 0.5}};
    EXPECT_THROW(fit_scaling_exponent(same), std::domain_error);
    std::vector<ScalingSample> one{{0.0, 1.0, 0.5}};
    EXPECT_THROW(fit_scaling_exponent(one), std::invalid_argument);
}

TEST(SpectralCore, ValidationRejectsMalformedModels) {
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Identity(2, 2);
    SpectralModel unsorted(0.0, 1.0, {{{-2.0, 0.0}, 1}, {{-1.0, 0.0}, 1}}, 0.0, g);
    EXPECT_THROW(unsorted.validate(), std::invalid_argument);
    Eigen::MatrixXcd indefinite(2, 2);
    indefinite << 1.0, 2.0, 2.0, 1.0;
    SpectralModel bad_g(0.0, 1.0, {{{-1.0, 0.0}, 1}, {{-2.0, 0.0}, 1}}, 0.0, indefinite);
    EXPECT_THROW(bad_g.validate(), std::invalid_argument);
    SpectralModel unstable(0.0, 1.0, {{{0.1, 0.0}, 1}}, 1.0, Eigen::MatrixXcd::Identity(1, 1));
    EXPECT_THROW(unstable.validate(), std::invalid_argument);
    EXPECT_THROW(SpectralModel(0.0, 1.0, {{{-1.0, 0.0}, 2}}, 0.0, g.topLeftCorner(1, 1)), std::invalid_argument);
}

TEST(SpectralCore, DegenerateDenominatorThrows) {
    const SpectralModel model(0.0, -1.0, {{{0.0, 1.0}, 1}}, 1.0, Eigen::MatrixXcd::Identity(1, 1));
    EXPECT_THROW(autocov_pair(model, 0, 0, 0.0), DegenerateDenominator);
    EXPECT_THROW(autocov_jordan(model, {0, 1}, {0, 1}, 0.0), DegenerateDenominator);
    EXPECT_THROW(autocov_jordan(model, {0, 2}, {0, 1}, 0.0), std::out_of_range);
}
