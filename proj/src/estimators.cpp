#include "ews/estimators.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ews::est {

ScalarSeries ScalarSeries::from_real(double step, std::span<const double> v) {
    return ScalarSeries(step, std::vector<cplx>(v.begin(), v.end()));
}

std::size_t lag_steps(double dt, double tau) {
    if (!(dt > 0.0)) throw std::invalid_argument("series step must be positive");
    if (tau < 0.0) throw std::invalid_argument("lag must be non-negative");
    return static_cast<std::size_t>(std::llround(tau / dt));
}

namespace {

std::size_t burn_in(std::size_t n, const EstimatorOptions& opt) {
    if (opt.burn_in_fraction < 0.0 || opt.burn_in_fraction >= 1.0)
        throw std::invalid_argument("burn-in fraction must lie in [0, 1)");
    return static_cast<std::size_t>(std::floor(opt.burn_in_fraction * static_cast<double>(n)));
}

cplx mean_of(std::span<const cplx> v) {
    return std::accumulate(v.begin(), v.end(), cplx{0.0, 0.0}) / static_cast<double>(v.size());
}

}  // namespace

cplx temporal_autocov(const ScalarSeries& s, const ScalarSeries& r, double tau, EstimatorOptions opt) {
    if (s.size() != r.size()) throw std::invalid_argument("series lengths differ");
    if (s.dt != r.dt) throw std::invalid_argument("series steps differ");
    const std::size_t start = burn_in(s.size(), opt);
    const std::size_t window = s.size() - start;
    const std::size_t lag = lag_steps(s.dt, tau);
    if (window <= lag + 1) throw std::invalid_argument("window too short for the requested lag");

    const std::span<const cplx> sw(s.values.data() + start, window);
    const std::span<const cplx> rw(r.values.data() + start, window);
    const cplx ms = mean_of(sw);
    const cplx mr = mean_of(rw);
    const std::size_t count = window - lag;
    cplx acc{0.0, 0.0};
    for (std::size_t t = 0; t < count; ++t) acc += std::conj(sw[t + lag] - ms) * (rw[t] - mr);
    return acc / static_cast<double>(count);
}

cplx temporal_autocorr(const ScalarSeries& s, double tau, EstimatorOptions opt) {
    const cplx c0 = temporal_autocov(s, s, 0.0, opt);
    if (std::abs(c0) == 0.0) throw std::domain_error("series has zero variance");
    return temporal_autocov(s, s, tau, opt) / c0;
}

std::vector<cplx> autocorr_curve(const ScalarSeries& s, double max_tau, EstimatorOptions opt) {
    const std::size_t lags = lag_steps(s.dt, max_tau);
    const std::size_t start = burn_in(s.size(), opt);
    const std::size_t window = s.size() - start;
    if (window <= lags + 1) throw std::invalid_argument("window too short for the requested lag");
    const std::span<const cplx> w(s.values.data() + start, window);
    const cplx m = mean_of(w);
    std::vector<cplx> centred(window);
    for (std::size_t t = 0; t < window; ++t) centred[t] = w[t] - m;

    std::vector<cplx> out(lags + 1);
    for (std::size_t lag = 0; lag <= lags; ++lag) {
        cplx acc{0.0, 0.0};
        const std::size_t count = window - lag;
        for (std::size_t t = 0; t < count; ++t) acc += std::conj(centred[t + lag]) * centred[t];
        out[lag] = acc / static_cast<double>(count);
    }
    const cplx c0 = out[0];
    if (std::abs(c0) == 0.0) throw std::domain_error("series has zero variance");
    for (auto& v : out) v /= c0;
    return out;
}

double l2_distance(std::span<const cplx> a, std::span<const cplx> b, double dt) {
    if (a.size() != b.size()) throw std::invalid_argument("curves have different lengths");
    if (a.size() < 2) throw std::invalid_argument("need at least two samples");
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double e2 = std::norm(a[k] - b[k]);
        acc += (k == 0 || k + 1 == a.size()) ? 0.5 * e2 : e2;
    }
    return std::sqrt(acc * dt);
}

LogStats ensemble_logstats(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("empty ensemble");
    std::vector<double> logs;
    logs.reserve(values.size());
    for (double v : values) {
        if (!(v > 0.0)) throw std::domain_error("log statistics need positive values");
        logs.push_back(std::log10(v));
    }
    LogStats st;
    st.mean = std::accumulate(logs.begin(), logs.end(), 0.0) / static_cast<double>(logs.size());
    if (logs.size() > 1) {
        double ss = 0.0;
        for (double l : logs) ss += (l - st.mean) * (l - st.mean);
        st.std = std::sqrt(ss / static_cast<double>(logs.size() - 1));
    }
    return st;
}

cplx project(const Eigen::Ref<const Eigen::VectorXcd>& field, const Eigen::Ref<const Eigen::VectorXcd>& direction,
             const Eigen::Ref<const Eigen::VectorXd>& weights) {
    if (field.size() != direction.size() || field.size() != weights.size())
        throw std::invalid_argument("projection operands have different sizes");
    cplx acc{0.0, 0.0};
    for (Eigen::Index k = 0; k < field.size(); ++k) acc += weights[k] * field[k] * std::conj(direction[k]);
    return acc;
}

}  // namespace ews::est
