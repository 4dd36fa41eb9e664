#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ews/estimators.hpp"
#include "ews/experiments.hpp"
#include "ews/parallel.hpp"
#include "ews/rng.hpp"
#include "ews/spectral_core.hpp"

namespace ews::exp {

namespace {

void require_below_threshold(heat::HeatConfig cfg, const std::vector<double>& p_list) {
    if (p_list.size() < 2) throw std::invalid_argument("a sweep needs at least two values of p");
    for (double p : p_list) {
        cfg.p = p;
        cfg.validate();
    }
}

double variance_of(const heat::ModeTrajectory& tr, Eigen::Index row) {
    std::vector<double> v(tr.coeffs.cols());
    for (Eigen::Index k = 0; k < tr.coeffs.cols(); ++k) v[k] = tr.coeffs(row, k);
    const auto s = est::ScalarSeries::from_real(tr.dt, v);
    return est::temporal_autocov(s, s, 0.0).real();
}

}  // namespace

void HeatScalingConfig::validate() const {
    heat.validate();
    require_below_threshold(heat, p_list);
    if (mode >= heat.modes) throw std::invalid_argument("recorded mode outside the truncation");
    if (!(dt > 0.0) || !(t_end > dt)) throw std::invalid_argument("need 0 < dt < t_end");
    seeds.validate();
    if (autocorr_t_end > 0.0) {
        heat::HeatConfig c = heat;
        c.p = autocorr_p;
        c.validate();
        if (!(autocorr_max_lag > 0.0) || !(autocorr_max_lag < autocorr_t_end))
            throw std::invalid_argument("autocorrelation lag window must be inside the run");
    }
}

HeatScalingResult heat_neumann_scaling(const HeatScalingConfig& cfg, const std::string& experiment, int threads) {
    cfg.validate();
    HeatScalingResult res;
    const std::size_t np = cfg.p_list.size(), ns = cfg.seeds.count();
    std::vector<double> var(np * ns);
    parallel_for(np * ns, threads, [&](std::size_t t) {
        heat::HeatConfig c = cfg.heat;
        c.p = cfg.p_list[t / ns];
        const auto key = stream_key(experiment, c.p, cfg.seeds.at(t % ns));
        var[t] = variance_of(heat::simulate_modes(c, cfg.t_end, cfg.dt, key, {cfg.mode}), 0);
    });
    std::vector<spectral::ScalingSample> theory, mc;
    for (std::size_t i = 0; i < np; ++i) {
        heat::HeatConfig c = cfg.heat;
        c.p = cfg.p_list[i];
        HeatScalingRow row;
        row.p = c.p;
        row.rate = c.threshold() - c.p;
        row.theory = heat::stationary_cov_entry(c, cfg.mode, cfg.mode, 0.0);
        row.per_seed.assign(var.begin() + static_cast<long>(i * ns), var.begin() + static_cast<long>((i + 1) * ns));
        const auto stats = est::ensemble_logstats(row.per_seed);
        row.mc_mean_log10 = stats.mean;
        row.mc_std_log10 = stats.std;
        theory.push_back({row.p, row.theory, row.rate});
        mc.push_back({row.p, std::pow(10.0, row.mc_mean_log10), row.rate});
        res.rows.push_back(std::move(row));
    }
    res.theory_slope = spectral::fit_scaling_exponent(theory).exponent;
    res.mc_slope = spectral::fit_scaling_exponent(mc).exponent;

    if (cfg.autocorr_t_end > 0.0) {
        heat::HeatConfig c = cfg.heat;
        c.p = cfg.autocorr_p;
        std::vector<std::vector<cplx>> curves(ns);
        parallel_for(ns, threads, [&](std::size_t s) {
            const auto key = stream_key(experiment + "/autocorr", c.p, cfg.seeds.at(s));
            const auto tr = heat::simulate_modes(c, cfg.autocorr_t_end, cfg.dt, key, {cfg.mode});
            std::vector<double> v(tr.coeffs.cols());
            for (Eigen::Index k = 0; k < tr.coeffs.cols(); ++k) v[k] = tr.coeffs(0, k);
            curves[s] = est::autocorr_curve(est::ScalarSeries::from_real(tr.dt, v), cfg.autocorr_max_lag);
        });
        const double lambda = heat::operator_eigenvalue(c, cfg.mode);
        std::vector<cplx> mean(curves.front().size()), th(mean.size());
        for (std::size_t k = 0; k < mean.size(); ++k) {
            for (const auto& cv : curves) mean[k] += cv[k] / static_cast<double>(ns);
            const double tau = cfg.dt * static_cast<double>(k);
            th[k] = std::exp(lambda * tau);
            res.autocorr.push_back({tau, mean[k].real(), th[k].real()});
        }
        res.autocorr_l2 = est::l2_distance(mean, th, cfg.dt);
    }
    return res;
}

void HeatWeightedConfig::validate() const {
    heat.validate();
    if (distances.size() < 2) throw std::invalid_argument("a sweep needs at least two distances");
    for (double d : distances)
        if (!(d > 0.0)) throw std::invalid_argument("distances to threshold must be positive");
    if (modes.empty()) throw std::invalid_argument("no modes requested");
    for (auto m : modes)
        if (m >= heat.modes) throw std::invalid_argument("requested mode outside the truncation");
    if (k_small < 1 || k_large <= k_small) throw std::invalid_argument("need 1 <= k_small < k_large");
}

HeatWeightedResult heat_dirichlet_weighted(const HeatWeightedConfig& cfg) {
    cfg.validate();
    HeatWeightedResult res;
    res.predicted_slope = -1.0 + cfg.alpha;
    for (auto mode : cfg.modes) {
        std::vector<spectral::ScalingSample> samples;
        for (double d : cfg.distances) {
            heat::HeatConfig c = cfg.heat;
            c.p = c.threshold() - d;
            const double v = heat::weighted_cov_entry(c, mode, mode, cfg.alpha);
            res.rows.push_back({c.p, d, mode, v});
            samples.push_back({c.p, v, d});
        }
        res.slopes.push_back(spectral::fit_scaling_exponent(samples).exponent);
    }
    res.wellposedness_ratio =
        heat::wellposedness_integral(cfg.heat, cfg.k_large) / heat::wellposedness_integral(cfg.heat, cfg.k_small);
    return res;
}

void WellposednessConfig::validate() const {
    for (auto bc : {heat::BoundaryKind::Neumann, heat::BoundaryKind::Dirichlet}) {
        heat::HeatConfig c = heat;
        c.bc = bc;
        c.validate();
    }
    if (modes.size() < 2) throw std::invalid_argument("need at least two truncation levels");
    if (!std::is_sorted(modes.begin(), modes.end()) || modes.front() < 1)
        throw std::invalid_argument("truncation levels must be positive and increasing");
}

WellposednessResult heat_wellposedness(const WellposednessConfig& cfg) {
    cfg.validate();
    WellposednessResult res;
    for (auto bc : {heat::BoundaryKind::Neumann, heat::BoundaryKind::Dirichlet}) {
        heat::HeatConfig c = cfg.heat;
        c.bc = bc;
        std::vector<double> v;
        for (auto k : cfg.modes) {
            v.push_back(heat::wellposedness_integral(c, k));
            res.rows.push_back({bc, k, v.back()});
        }
        if (bc == heat::BoundaryKind::Neumann)
            res.neumann_tail_ratio = v.back() / v[v.size() - 2];
        else
            res.dirichlet_growth_ratio = v.back() / v.front();
    }
    return res;
}

}  // namespace ews::exp
