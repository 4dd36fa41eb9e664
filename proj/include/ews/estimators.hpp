#pragma once

/// Time-average estimators of covariances along scalar projections.
///
/// For complex series the lagged factor is conjugated, so that
/// temporal_autocov(s, r, tau) estimates E[conj(s(t + tau)) r(t)], which is the
/// convention under which <f1, V^tau f2> pairs with the projections on f1 and
/// f2.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ews::est {

using cplx = std::complex<double>;

struct ScalarSeries {
    double dt = 0.0;
    std::vector<cplx> values;

    ScalarSeries() = default;
    ScalarSeries(double step, std::vector<cplx> v) : dt(step), values(std::move(v)) {}
    static ScalarSeries from_real(double step, std::span<const double> v);
    std::size_t size() const { return values.size(); }
};

struct EstimatorOptions {
    double burn_in_fraction = 0.1;
};

/// Number of samples of lag tau after snapping to the grid.
std::size_t lag_steps(double dt, double tau);

/// Centred, lag-normalised covariance estimate on the post burn-in window.
cplx temporal_autocov(const ScalarSeries& s, const ScalarSeries& r, double tau,
                      EstimatorOptions opt = {});

/// temporal_autocov(s, s, tau) / temporal_autocov(s, s, 0).
cplx temporal_autocorr(const ScalarSeries& s, double tau, EstimatorOptions opt = {});

/// Autocorrelation on every lag 0, dt, ..., max_tau.
std::vector<cplx> autocorr_curve(const ScalarSeries& s, double max_tau, EstimatorOptions opt = {});

/// L2 distance on [0, (n-1) dt] between two sampled curves (trapezoid rule).
double l2_distance(std::span<const cplx> a, std::span<const cplx> b, double dt);

struct LogStats {
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation; zero for a single value
};

/// Mean and spread of log10 over an ensemble of positive values.
LogStats ensemble_logstats(std::span<const double> values);

/// Weighted projection sum_k w_k field_k conj(direction_k).
cplx project(const Eigen::Ref<const Eigen::VectorXcd>& field,
             const Eigen::Ref<const Eigen::VectorXcd>& direction,
             const Eigen::Ref<const Eigen::VectorXd>& weights);

}  // namespace ews::est
