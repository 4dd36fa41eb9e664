#include <gtest/gtest.h>

#include <cmath>

#include "ews/estimators.hpp"
#include "ews/rng.hpp"

using namespace ews::est;

TEST(Estimators, HandComputedLaggedCovariance) {
    // centred window {-1.5,-0.5,0.5,1.5}; lag 1 pairs: (-0.5)(-1.5)+(0.5)(-0.5)+(1.5)(0.5) = 1.25, over 3
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto s = ScalarSeries::from_real(0.5, v);
    EstimatorOptions none{0.0};
    EXPECT_NEAR(temporal_autocov(s, s, 0.0, none).real(), 1.25, 1e-15);
    EXPECT_NEAR(temporal_autocov(s, s, 0.5, none).real(), 1.25 / 3.0, 1e-15);
    // lag snapping: 0.6 rounds to one step
    EXPECT_NEAR(temporal_autocov(s, s, 0.6, none).real(), 1.25 / 3.0, 1e-15);
}

TEST(Estimators, BurnInDiscardsTheLeadingFraction) {
    std::vector<double> v(100, 0.0);
    for (int k = 0; k < 10; ++k) v[k] = 100.0;
    for (int k = 10; k < 100; ++k) v[k] = (k % 2) ? 1.0 : -1.0;
    const auto s = ScalarSeries::from_real(1.0, v);
    EXPECT_NEAR(temporal_autocov(s, s, 0.0).real(), 1.0, 1e-12);
}

TEST(Estimators, ComplexRotationUsesConjugatedLag) {
    const double w = 0.3, dt = 0.1;
    std::vector<cplx> v;
    for (int k = 0; k < 20000; ++k) v.push_back(std::exp(cplx{0.0, w * k * dt}));
    const ScalarSeries s(dt, v);
    const cplx r = temporal_autocorr(s, 2.0);
    EXPECT_NEAR(std::abs(r - std::exp(cplx{0.0, -w * 2.0})), 0.0, 2e-3);
}

TEST(Estimators, OrnsteinUhlenbeckAutocorrelation) {
    const double theta = 1.0, dt = 0.01;
    const double a = std::exp(-theta * dt), sd = std::sqrt((1.0 - a * a) / (2.0 * theta));
    ews::NormalStream normal(ews::stream_key("est-test", 0.0, 1));
    std::vector<double> x(400000);
    for (std::size_t k = 1; k < x.size(); ++k) x[k] = a * x[k - 1] + sd * normal();
    const auto s = ScalarSeries::from_real(dt, x);
    EXPECT_NEAR(temporal_autocov(s, s, 0.0).real(), 0.5, 0.03);
    const auto curve = autocorr_curve(s, 2.0);
    for (std::size_t k = 0; k < curve.size(); k += 50)
        EXPECT_NEAR(curve[k].real(), std::exp(-theta * k * dt), 0.05);
    EXPECT_NEAR(curve[100].real(), temporal_autocorr(s, 1.0).real(), 1e-12);
}

TEST(Estimators, L2DistanceOfConstantOffset) {
    std::vector<cplx> a(101, 0.0), b(101, 0.1);
    EXPECT_NEAR(l2_distance(a, b, 0.1), 0.1 * std::sqrt(10.0), 1e-14);
}

TEST(Estimators, EnsembleLogStats) {
    const std::vector<double> v{1.0, 10.0, 100.0};
    const auto st = ensemble_logstats(v);
    EXPECT_NEAR(st.mean, 1.0, 1e-15);
    EXPECT_NEAR(st.std, 1.0, 1e-15);
    const std::vector<double> bad{1.0, -1.0};
    EXPECT_THROW(ensemble_logstats(bad), std::domain_error);
}

TEST(Estimators, ProjectionIsConjugateLinearInDirection) {
    Eigen::VectorXcd f(2), g(2);
    f << cplx{1.0, 1.0}, 2.0;
    g << cplx{0.0, 1.0}, 1.0;
    Eigen::VectorXd w(2);
    w << 0.5, 2.0;
    EXPECT_NEAR(std::abs(project(f, g, w) - (0.5 * cplx{1.0, 1.0} * cplx{0.0, -1.0} + 4.0)), 0.0, 1e-15);
}

TEST(Estimators, RejectsShortWindowsAndMismatches) {
    const std::vector<double> v{1.0, 2.0, 3.0};
    const auto s = ScalarSeries::from_real(1.0, v);
    EXPECT_THROW(temporal_autocov(s, s, 5.0), std::invalid_argument);
    const auto t = ScalarSeries::from_real(0.5, v);
    EXPECT_THROW(temporal_autocov(s, t, 0.0), std::invalid_argument);
}
