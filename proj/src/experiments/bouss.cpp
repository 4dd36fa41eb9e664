#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <stdexcept>

#include "ews/boussinesq/continuation.hpp"
#include "ews/boussinesq/linearization.hpp"
#include "ews/boussinesq/scenarios.hpp"
#include "ews/estimators.hpp"
#include "ews/experiments.hpp"
#include "ews/parallel.hpp"
#include "ews/rng.hpp"

namespace ews::exp {

using bouss::Model;
using Eigen::Index;

namespace {

/// Largest parameter step of natural continuation between requested points.
constexpr double kMaxStep = 0.01;

void require_increasing(const std::vector<double>& p, std::size_t min_size) {
    if (p.size() < min_size) throw std::invalid_argument("parameter list is too short");
    for (std::size_t k = 1; k < p.size(); ++k)
        if (!(p[k] > p[k - 1])) throw std::invalid_argument("parameter list must be strictly increasing");
}

bouss::Grid2D grid_of(const BoussSetup& s) { return bouss::build_grid(s.M, s.N, s.params.L); }

Model model_at(const bouss::Grid2D& grid, const BoussSetup& s, double p) {
    auto prm = s.params;
    prm.p = p;
    return Model(grid, prm);
}

Eigen::VectorXd branch_start(const Model& m, SteadyBranch b, double p) {
    switch (b) {
    case SteadyBranch::Thermal: return bouss::regime1_thermal_state(m, p);
    case SteadyBranch::Sinking: return bouss::regime1_sinking_state(m, p);
    case SteadyBranch::Skewed: return bouss::regime2_skewed_state(m, p, std::min(0.3, p));
    }
    throw std::invalid_argument("unknown branch");
}

std::vector<Eigen::VectorXd> states_on(const bouss::Grid2D& grid, const BoussSetup& s, const std::vector<double>& p) {
    require_increasing(p, 1);
    const Model m = model_at(grid, s, p.front());
    std::vector<Eigen::VectorXd> out{branch_start(m, s.branch, p.front())};
    for (std::size_t k = 1; k < p.size(); ++k) out.push_back(bouss::follow_branch(m, out.back(), p[k - 1], p[k], kMaxStep));
    return out;
}

eig::EigOptions values_only() {
    eig::EigOptions opt;
    opt.vectors = false;
    return opt;
}

eig::EigOptions with_vectors(Index keep) {
    eig::EigOptions opt;
    opt.keep_vectors = keep;
    return opt;
}

cplx label(const LabelledSpectrum& l, int i) {
    if (i < 1 || i > l.values.size()) throw std::out_of_range("eigenvalue label out of range");
    return l.values[i - 1];
}

/// Per-p state shared by all seeds of a stochastic experiment.
struct PointSetup {
    double p = 0.0;
    std::unique_ptr<Model> model;
    std::unique_ptr<bouss::Stepper> stepper;
    std::vector<bouss::Observable> observables;
    std::vector<cplx> observable_values;
    LabelledSpectrum spectrum;
};

/// Steady states, spectra and steppers for every p. The eigen-direction with
/// label i is the left vector of lambda_i.
std::vector<PointSetup> prepare_points(const BoussSetup& setup, const std::vector<double>& p_list,
                                       const std::vector<ObservableSpec>& specs, double dt, bouss::Scheme scheme,
                                       int threads) {
    const auto grid = grid_of(setup);
    const auto states = states_on(grid, setup, p_list);
    int top = 2;
    for (const auto& o : specs)
        if (o.kind == ObservableKind::Adjoint) top = std::max(top, o.index);
    std::vector<PointSetup> pts(p_list.size());
    parallel_for(p_list.size(), threads, [&](std::size_t k) {
        auto& pt = pts[k];
        pt.p = p_list[k];
        pt.model = std::make_unique<Model>(model_at(grid, setup, pt.p));
        const auto set = bouss::steady_spectrum(*pt.model, states[k], with_vectors(top + 1));
        pt.spectrum = label_spectrum(set);
        for (const auto& o : specs) {
            if (o.kind == ObservableKind::Indicator) {
                pt.observables.push_back(bouss::indicator_observable(*pt.model, o.name, o.field, o.box));
                pt.observable_values.emplace_back(std::nan(""), std::nan(""));
            } else {
                const Index pos = pt.spectrum.order.at(static_cast<std::size_t>(o.index - 1));
                if (pos >= set.vector_count()) throw std::logic_error("eigenvector was not kept");
                pt.observables.push_back({o.name, set.left.col(pos)});
                pt.observable_values.push_back(label(pt.spectrum, o.index));
            }
        }
        pt.stepper = std::make_unique<bouss::Stepper>(*pt.model, states[k], dt, scheme);
    });
    return pts;
}

}  // namespace

void BoussSetup::validate() const {
    params.validate();
    if (M < 3 || N < 3) throw std::invalid_argument("grid needs at least 3 x 3 interior nodes");
    if (branch != SteadyBranch::Skewed && params.nu != 0.0)
        throw std::invalid_argument("the thermal and sinking branches need symmetric forcing (nu = 0)");
}

std::vector<Eigen::VectorXd> steady_states(const BoussSetup& setup, const std::vector<double>& p_list) {
    setup.validate();
    return states_on(grid_of(setup), setup, p_list);
}

LabelledSpectrum label_spectrum(const eig::EigenSet& set) {
    LabelledSpectrum l;
    const Index z = bouss::structural_zero_index(set);
    l.order.push_back(z);
    for (Index k = 0; k < set.size(); ++k)
        if (k != z) l.order.push_back(k);
    l.values.resize(set.size());
    for (Index k = 0; k < set.size(); ++k) l.values[k] = set.values[l.order[static_cast<std::size_t>(k)]];
    return l;
}

double spectrum_mismatch(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, Index count) {
    if (a.size() != b.size()) throw std::invalid_argument("spectra have different sizes");
    if (count > a.size()) throw std::invalid_argument("more entries requested than the spectrum holds");
    std::vector<bool> used(static_cast<std::size_t>(b.size()), false);
    double worst = 0.0;
    for (Index i = 0; i < (count < 0 ? a.size() : count); ++i) {
        Index best = -1;
        double dist = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < b.size(); ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double d = std::abs(a[i] - b[j]);
            if (d < dist) {
                dist = d;
                best = j;
            }
        }
        used[static_cast<std::size_t>(best)] = true;
        worst = std::max(worst, dist / std::max(std::abs(a[i]), 1.0));
    }
    return worst;
}

// ---------------------------------------------------------------------------

void BranchConfig::validate() const {
    setup.validate();
    require_increasing(p_list, 2);
    if (arclength && !(ds > 0.0 && ds_max >= ds)) throw std::invalid_argument("need 0 < ds <= ds_max");
    if (eigs_every < 0) throw std::invalid_argument("eigs_every must be non-negative");
    if (crossing_bracket) {
        if (!(crossing_bracket->first < crossing_bracket->second))
            throw std::invalid_argument("crossing bracket must be increasing");
        if (crossing_grids.empty()) throw std::invalid_argument("crossing search needs at least one grid");
        for (auto [m, n] : crossing_grids)
            if (m < 3 || n < 3) throw std::invalid_argument("grid needs at least 3 x 3 interior nodes");
    }
}

BranchResult bouss_branch(const BranchConfig& cfg, int threads) {
    cfg.validate();
    BranchResult res;
    const auto grid = grid_of(cfg.setup);
    const Model m = model_at(grid, cfg.setup, cfg.p_list.front());
    std::vector<Eigen::VectorXd> xs;
    if (cfg.arclength) {
        const Eigen::VectorXd x0 = states_on(grid, cfg.setup, {cfg.p_list.front()}).front();
        bouss::ArclengthOptions opt;
        opt.ds_max = cfg.ds_max;
        const auto br = bouss::continuation_arclength(m, cfg.p_list.front(), cfg.p_list.back(), cfg.ds, x0, opt);
        res.stop_reason = br.stop_reason;
        for (const auto& pt : br.points) {
            res.rows.push_back({pt.p, pt.max_psi, pt.min_psi, pt.arclength, pt.dp_ds});
            xs.push_back(pt.x);
        }
        if (br.fold_detected) {
            ThresholdRow t{"fold", cfg.setup.M, cfg.setup.N, br.fold_p, br.fold_p, br.fold_p};
            for (std::size_t k = 1; k < br.points.size(); ++k)
                if (br.points[k - 1].dp_ds > 0.0 && br.points[k].dp_ds <= 0.0) {
                    t.lower = std::min(br.points[k - 1].p, br.points[k].p);
                    t.upper = std::max({br.points[k - 1].p, br.points[k].p, br.fold_p});
                    break;
                }
            res.thresholds.push_back(t);
        }
    } else {
        xs = states_on(grid, cfg.setup, cfg.p_list);
        res.stop_reason = "end of parameter list";
        for (std::size_t k = 0; k < xs.size(); ++k) {
            const auto f = m.unpack(xs[k]);
            res.rows.push_back({cfg.p_list[k], f.psi.maxCoeff(), f.psi.minCoeff(), std::nan(""), 1.0});
        }
    }
    if (cfg.eigs_every > 0) {
        std::vector<std::size_t> picks;
        for (std::size_t k = 0; k < res.rows.size(); k += static_cast<std::size_t>(cfg.eigs_every)) picks.push_back(k);
        parallel_for(picks.size(), threads, [&](std::size_t t) {
            auto& row = res.rows[picks[t]];
            const Model mp = model_at(grid, cfg.setup, row.p);
            const auto l = label_spectrum(bouss::steady_spectrum(mp, xs[picks[t]], values_only()));
            row.lead = label(l, 2);
            row.stable = row.lead.real() < 0.0 ? 1 : 0;
        });
    }
    if (cfg.crossing_bracket) {
        const auto [lo, hi] = *cfg.crossing_bracket;
        for (auto [gm, gn] : cfg.crossing_grids) {
            BoussSetup s = cfg.setup;
            s.M = gm;
            s.N = gn;
            const auto g = grid_of(s);
            const Model mg = model_at(g, s, lo);
            const auto x_lo = states_on(g, s, {lo}).front();
            const auto cr = bouss::locate_real_crossing(mg, x_lo, lo, hi);
            ThresholdRow t{"pitchfork", gm, gn, cr.p, cr.lower, cr.upper};
            const Eigen::VectorXd* ends[2] = {&cr.x_lower, &cr.x_upper};
            double re[2];
            parallel_for(2, threads, [&](std::size_t e) {
                re[e] = label(label_spectrum(bouss::steady_spectrum(mg, *ends[e], values_only())), 2).real();
            });
            t.re_lambda2_lower = re[0];
            t.re_lambda2_upper = re[1];
            res.thresholds.push_back(t);
        }
    }
    return res;
}

// ---------------------------------------------------------------------------

void EigsConfig::validate() const {
    setup.validate();
    require_increasing(p_list, 1);
    if (count < 4) throw std::invalid_argument("report at least four eigenvalues");
    for (int i : dump_vectors)
        if (i < 1 || i > count) throw std::invalid_argument("dumped eigenvector labels must lie in 1..count");
}

namespace {

void dump_fields(const bouss::StateFields& f, const bouss::Grid2D& g, double p, std::vector<FieldSample>& out) {
    const std::pair<const char*, const Eigen::MatrixXd*> parts[] = {
        {"psi", &f.psi}, {"omega", &f.omega}, {"T", &f.T}, {"S", &f.S}};
    for (const auto& [name, m] : parts)
        for (int i = 0; i < m->rows(); ++i)
            for (int j = 0; j < m->cols(); ++j)
                out.push_back({p, "state", name, i, j, g.z[static_cast<std::size_t>(i)],
                               g.x[static_cast<std::size_t>(j)], (*m)(i, j)});
}

/// Writes a dynamic-space vector [omega; T; S] at the nodes that carry unknowns.
void dump_dynamic(const Eigen::VectorXcd& v, const Model& m, double p, const std::string& name,
                  std::vector<FieldSample>& out) {
    const auto& lay = m.layout();
    const auto& g = m.grid();
    const Index off = lay.n_psi();
    for (const char* field : {"omega", "T", "S"})
        for (int i = 0; i <= g.M + 1; ++i)
            for (int j = 0; j <= g.N + 1; ++j) {
                const std::string f = field;
                const Index k = f == "omega" ? lay.omega(i, j) : f == "T" ? lay.T(i, j) : lay.S(i, j);
                if (k < 0) continue;
                out.push_back({p, name, f, i, j, g.z[static_cast<std::size_t>(i)], g.x[static_cast<std::size_t>(j)],
                               v[k - off]});
            }
}

}  // namespace

EigsResult bouss_eigs(const EigsConfig& cfg, int threads) {
    cfg.validate();
    const auto grid = grid_of(cfg.setup);
    const auto xs = states_on(grid, cfg.setup, cfg.p_list);
    EigsResult res;
    res.summary.resize(cfg.p_list.size());
    std::vector<std::vector<EigsRow>> rows(cfg.p_list.size());
    std::vector<std::vector<FieldSample>> fields(cfg.p_list.size());
    parallel_for(cfg.p_list.size(), threads, [&](std::size_t k) {
        const double p = cfg.p_list[k];
        const Model m = model_at(grid, cfg.setup, p);
        const auto set = bouss::steady_spectrum(m, xs[k], with_vectors(cfg.count + 1));
        const auto l = label_spectrum(set);
        for (int i = 1; i <= cfg.count && i <= l.values.size(); ++i) {
            const Index pos = l.order[static_cast<std::size_t>(i - 1)];
            rows[k].push_back({p, i, l.values[i - 1], pos < set.residuals.size() ? set.residuals[pos] : std::nan("")});
        }
        const auto zc = bouss::check_structural_zero(m, set);
        const auto f = m.unpack(xs[k]);
        res.summary[k] = {p, f.psi.maxCoeff(), zc.eigenvalue_modulus, zc.direction_deviation, label(l, 2), label(l, 4)};
        if (cfg.dump_state) dump_fields(f, grid, p, fields[k]);
        for (int i : cfg.dump_vectors) {
            const Index pos = l.order[static_cast<std::size_t>(i - 1)];
            if (pos >= set.right.cols()) throw std::domain_error("eigenvector " + std::to_string(i) + " was not kept");
            dump_dynamic(set.right.col(pos), m, p, "right_" + std::to_string(i), fields[k]);
            dump_dynamic(set.left.col(pos), m, p, "left_" + std::to_string(i), fields[k]);
        }
    });
    for (auto& r : rows) res.rows.insert(res.rows.end(), r.begin(), r.end());
    for (auto& f : fields) res.fields.insert(res.fields.end(), f.begin(), f.end());
    return res;
}

// ---------------------------------------------------------------------------

namespace {

void validate_observable(const ObservableSpec& o) {
    if (o.name.empty()) throw std::invalid_argument("observable needs a name");
    if (o.kind == ObservableKind::Indicator) {
        if (!(o.box.x1_lo < o.box.x1_hi) || !(o.box.x2_lo < o.box.x2_hi))
            throw std::invalid_argument("indicator box of " + o.name + " is empty");
    } else if (o.index < 2) {
        throw std::invalid_argument("eigen-direction labels start at 2 (1 is the structural zero)");
    }
    if (o.expect_slope && !(o.expect_slope->first < o.expect_slope->second))
        throw std::invalid_argument("slope window of " + o.name + " is empty");
}

}  // namespace

void VarianceConfig::validate() const {
    setup.validate();
    require_increasing(p_list, 2);
    seeds.validate();
    if (!(dt > 0.0) || !(t_end > 10.0 * dt)) throw std::invalid_argument("need a run of at least ten steps");
    if (observables.empty()) throw std::invalid_argument("no observables configured");
    for (const auto& o : observables) validate_observable(o);
    if (!(jump_threshold > 0.0)) throw std::invalid_argument("jump threshold must be positive");
}

VarianceResult bouss_variance(const VarianceConfig& cfg, const std::string& experiment, int threads) {
    cfg.validate();
    auto pts = prepare_points(cfg.setup, cfg.p_list, cfg.observables, cfg.dt, cfg.scheme, threads);
    const std::size_t np = pts.size(), ns = cfg.seeds.count(), no = cfg.observables.size();
    std::vector<VarianceSample> samples(np * ns * no);
    std::vector<std::vector<TrajectorySample>> traj(np * ns);
    parallel_for(np * ns, threads, [&](std::size_t t) {
        const auto& pt = pts[t / ns];
        const auto seed = cfg.seeds.at(t % ns);
        bouss::SimulationOptions opt;
        opt.t_end = cfg.t_end;
        opt.key = stream_key(experiment, pt.p, seed);
        opt.jump_threshold = cfg.jump_threshold;
        const auto tr = cfg.nonlinear ? pt.stepper->simulate_nonlinear(pt.observables, opt)
                                      : pt.stepper->simulate_linearized(pt.observables, opt);
        for (std::size_t o = 0; o < no; ++o) {
            const est::ScalarSeries s(tr.sample_dt, tr.series[o]);
            samples[t * no + o] = {pt.p, seed, cfg.observables[o].name, est::temporal_autocov(s, s, 0.0).real(),
                                   tr.jumped};
            if (cfg.trajectory_stride > 0)
                for (std::size_t n = 0; n < tr.series[o].size(); n += cfg.trajectory_stride)
                    traj[t].push_back({pt.p, seed, cfg.observables[o].name, static_cast<double>(n) * tr.sample_dt,
                                       tr.series[o][n]});
        }
    });
    VarianceResult res;
    res.samples = samples;
    for (auto& v : traj) res.trajectories.insert(res.trajectories.end(), v.begin(), v.end());
    for (std::size_t o = 0; o < no; ++o) {
        std::vector<double> x, y;
        for (std::size_t k = 0; k < np; ++k) {
            std::vector<double> v;
            for (std::size_t s = 0; s < ns; ++s) v.push_back(samples[(k * ns + s) * no + o].variance);
            const auto st = est::ensemble_logstats(v);
            VarianceRow row;
            row.p = pts[k].p;
            row.observable = cfg.observables[o].name;
            row.mean_log10 = st.mean;
            row.std_log10 = st.std;
            row.lambda2 = label(pts[k].spectrum, 2);
            row.lambda_obs = pts[k].observable_values[o];
            if (!(row.lambda2.real() < 0.0)) throw std::domain_error("steady state is not stable");
            row.log10_rate = std::log10(-1.0 / row.lambda2.real());
            x.push_back(row.log10_rate);
            y.push_back(row.mean_log10);
            res.rows.push_back(row);
        }
        res.fits.push_back({cfg.observables[o].name, fit_line(x, y)});
    }
    return res;
}

// ---------------------------------------------------------------------------

void AutocorrConfig::validate() const {
    setup.validate();
    require_increasing(p_list, 1);
    seeds.validate();
    if (indices.empty()) throw std::invalid_argument("no eigen-directions requested");
    for (int i : indices)
        if (i < 2) throw std::invalid_argument("eigen-direction labels start at 2 (1 is the structural zero)");
    if (!(dt > 0.0) || !(max_lag > 0.0) || !(t_end > 2.0 * max_lag))
        throw std::invalid_argument("need 0 < dt and a run longer than twice the lag window");
    if (max_l2 && !(*max_l2 > 0.0)) throw std::invalid_argument("L2 tolerance must be positive");
}

AutocorrResult bouss_autocorr(const AutocorrConfig& cfg, const std::string& experiment, int threads) {
    cfg.validate();
    std::vector<ObservableSpec> specs;
    for (int i : cfg.indices) {
        ObservableSpec o;
        o.name = "e" + std::to_string(i);
        o.kind = ObservableKind::Adjoint;
        o.index = i;
        specs.push_back(o);
    }
    auto pts = prepare_points(cfg.setup, cfg.p_list, specs, cfg.dt, cfg.scheme, threads);
    const std::size_t np = pts.size(), ns = cfg.seeds.count(), no = specs.size();
    std::vector<std::vector<cplx>> curves(np * ns * no);
    parallel_for(np * ns, threads, [&](std::size_t t) {
        const auto& pt = pts[t / ns];
        bouss::SimulationOptions opt;
        opt.t_end = cfg.t_end;
        opt.key = stream_key(experiment, pt.p, cfg.seeds.at(t % ns));
        const auto tr = pt.stepper->simulate_linearized(pt.observables, opt);
        for (std::size_t o = 0; o < no; ++o)
            curves[t * no + o] = est::autocorr_curve(est::ScalarSeries(tr.sample_dt, tr.series[o]), cfg.max_lag);
    });
    AutocorrResult res;
    for (std::size_t k = 0; k < np; ++k)
        for (std::size_t o = 0; o < no; ++o) {
            AutocorrCurve c;
            c.p = pts[k].p;
            c.index = specs[o].index;
            c.lambda = pts[k].observable_values[o];
            const std::size_t len = curves[k * ns * no + o].size();
            std::vector<cplx> mean(len, 0.0), est_abs(len), th_abs(len);
            for (std::size_t s = 0; s < ns; ++s)
                for (std::size_t j = 0; j < len; ++j) mean[j] += curves[(k * ns + s) * no + o][j] / double(ns);
            for (std::size_t j = 0; j < len; ++j) {
                const double tau = cfg.dt * static_cast<double>(j);
                est_abs[j] = std::abs(mean[j]);
                th_abs[j] = std::abs(std::exp(std::conj(c.lambda) * tau));
                c.points.push_back({tau, est_abs[j].real(), th_abs[j].real()});
            }
            c.l2 = est::l2_distance(est_abs, th_abs, cfg.dt);
            res.curves.push_back(std::move(c));
        }
    return res;
}

// ---------------------------------------------------------------------------

void SymmetryConfig::validate() const {
    setup.validate();
    if (setup.branch == SteadyBranch::Skewed) throw std::invalid_argument("the mirror check needs a symmetric regime");
    if (leading < 1) throw std::invalid_argument("leading must be positive");
}

SymmetryResult bouss_symmetry(const SymmetryConfig& cfg) {
    cfg.validate();
    const auto grid = grid_of(cfg.setup);
    const Model m = model_at(grid, cfg.setup, cfg.p);
    const Eigen::VectorXd x = states_on(grid, cfg.setup, {cfg.p}).front();
    const auto fields = m.unpack(x);
    const Eigen::VectorXd xm = m.pack(bouss::mirror_solution(fields, m.params()));
    SymmetryResult r;
    r.state_residual = m.residual(x).cwiseAbs().maxCoeff();
    r.mirror_residual = m.residual(xm).cwiseAbs().maxCoeff();
    r.max_psi = fields.psi.maxCoeff();
    r.min_psi = fields.psi.minCoeff();
    r.asymmetry = (fields.psi + fields.psi.rowwise().reverse()).cwiseAbs().maxCoeff();
    const bouss::SchurComplement state(bouss::assemble_linearization(m, x));
    const Eigen::MatrixXd a = state.dense();
    const Eigen::VectorXd& w = state.blocks().weights;
    r.state_values = eig::eig_dense(a, w, values_only()).values;
    r.mirror_values = bouss::steady_spectrum(m, xm, values_only()).values;
    r.spectrum_mismatch = spectrum_mismatch(r.state_values, r.mirror_values);
    r.leading_mismatch = spectrum_mismatch(r.state_values, r.mirror_values, std::min(cfg.leading, a.rows()));
    const Eigen::MatrixXd at = a.transpose();
    r.roundoff_mismatch = spectrum_mismatch(r.state_values, eig::eig_dense(at, w, values_only()).values);
    return r;
}

}  // namespace ews::exp
