#include "ews/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "ews/csv.hpp"

namespace ews::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using exp::Check;
using io::CsvWriter;

namespace {

constexpr const char* kVersion = "1.0.0";

/// Typed access to one JSON object that records every value it hands out
/// (defaults included) and rejects keys nobody asked for.
class Reader {
public:
    explicit Reader(json node, std::string where) : node_(std::move(node)), where_(std::move(where)) {
        if (!node_.is_object()) throw std::invalid_argument(where_ + " must be a JSON object");
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    double num(const std::string& key, double def) {
        const double v = has(key) ? number(node_.at(key), key) : def;
        effective_[key] = finite_or_text(v);
        used_.insert(key);
        return v;
    }

    long long integer(const std::string& key, long long def) {
        long long v = def;
        if (has(key)) {
            const json& j = node_.at(key);
            if (!j.is_number_integer()) throw std::invalid_argument(path(key) + " must be an integer");
            v = j.get<long long>();
        }
        effective_[key] = v;
        used_.insert(key);
        return v;
    }

    bool flag(const std::string& key, bool def) {
        bool v = def;
        if (has(key)) {
            if (!node_.at(key).is_boolean()) throw std::invalid_argument(path(key) + " must be true or false");
            v = node_.at(key).get<bool>();
        }
        effective_[key] = v;
        used_.insert(key);
        return v;
    }

    std::string text(const std::string& key, const std::string& def) {
        std::string v = def;
        if (has(key)) {
            if (!node_.at(key).is_string()) throw std::invalid_argument(path(key) + " must be a string");
            v = node_.at(key).get<std::string>();
        }
        effective_[key] = v;
        used_.insert(key);
        return v;
    }

    std::vector<double> nums(const std::string& key, const std::vector<double>& def) {
        std::vector<double> v = def;
        if (has(key)) {
            const json& j = node_.at(key);
            if (!j.is_array()) throw std::invalid_argument(path(key) + " must be an array of numbers");
            v.clear();
            for (const auto& e : j) v.push_back(number(e, key));
        }
        json arr = json::array();
        for (double d : v) arr.push_back(finite_or_text(d));
        effective_[key] = arr;
        used_.insert(key);
        return v;
    }

    std::vector<long long> integers(const std::string& key, const std::vector<long long>& def) {
        std::vector<long long> v = def;
        if (has(key)) {
            const json& j = node_.at(key);
            if (!j.is_array()) throw std::invalid_argument(path(key) + " must be an array of integers");
            v.clear();
            for (const auto& e : j) {
                if (!e.is_number_integer()) throw std::invalid_argument(path(key) + " must hold integers");
                v.push_back(e.get<long long>());
            }
        }
        effective_[key] = v;
        used_.insert(key);
        return v;
    }

    /// Nested object; an absent key yields an empty object.
    Reader child(const std::string& key) {
        used_.insert(key);
        return Reader(has(key) ? node_.at(key) : json::object(), path(key));
    }

    /// Raw access for structured values that are echoed by the caller.
    const json& raw(const std::string& key) {
        used_.insert(key);
        return node_.at(key);
    }

    void put(const std::string& key, json value) { effective_[key] = std::move(value); }

    /// Throws on keys that were never read; returns the effective values.
    json finish() const {
        for (const auto& [k, v] : node_.items())
            if (!used_.count(k)) throw std::invalid_argument("unknown configuration key " + path(k));
        return effective_;
    }

    std::string path(const std::string& key) const { return where_ + "." + key; }

private:
    double number(const json& j, const std::string& key) const {
        if (j.is_number()) return j.get<double>();
        if (j.is_string()) {
            const auto s = j.get<std::string>();
            if (s == "inf") return std::numeric_limits<double>::infinity();
            if (s == "-inf") return -std::numeric_limits<double>::infinity();
        }
        throw std::invalid_argument(path(key) + " must be a number (or \"inf\")");
    }
    static json finite_or_text(double v) {
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        return v;
    }

    json node_;
    std::string where_;
    json effective_ = json::object();
    std::set<std::string> used_;
};

std::size_t to_size(long long v, const std::string& what) {
    if (v < 0) throw std::invalid_argument(what + " must be non-negative");
    return static_cast<std::size_t>(v);
}

exp::SeedRange read_seeds(Reader& r, exp::SeedRange def) {
    const auto v = r.integers("seeds", {static_cast<long long>(def.first), static_cast<long long>(def.last)});
    if (v.size() != 2 || v[0] < 0 || v[1] < 0) throw std::invalid_argument("seeds must be [first, last]");
    return {static_cast<std::uint64_t>(v[0]), static_cast<std::uint64_t>(v[1])};
}

heat::HeatConfig read_heat(Reader r, heat::BoundaryKind bc, double p, json& echo) {
    heat::HeatConfig c;
    c.bc = bc;
    c.length = r.num("length", c.length);
    c.c = r.num("c", c.c);
    c.p = r.num("p", p);
    const auto g = r.nums("gains", {c.gains[0], c.gains[1]});
    if (g.size() != 2) throw std::invalid_argument("heat.gains must hold two values");
    c.gains = {g[0], g[1]};
    c.modes = to_size(r.integer("modes", static_cast<long long>(c.modes)), "heat.modes");
    echo = r.finish();
    return c;
}

exp::BoussSetup read_bouss(Reader& r, int default_regime, json& echo) {
    const auto regime = r.integer("regime", default_regime);
    if (regime != 1 && regime != 2) throw std::invalid_argument("regime must be 1 or 2");
    exp::BoussSetup s;
    s.params = regime == 1 ? bouss::BoussinesqParams::regime1() : bouss::BoussinesqParams::regime2();
    const auto grid = r.integers("grid", {19, 39});
    if (grid.size() != 2) throw std::invalid_argument("grid must be [M, N]");
    s.M = static_cast<int>(grid[0]);
    s.N = static_cast<int>(grid[1]);
    const std::string branch = r.text("branch", regime == 1 ? "thermal" : "skewed");
    if (branch == "thermal")
        s.branch = exp::SteadyBranch::Thermal;
    else if (branch == "sinking")
        s.branch = exp::SteadyBranch::Sinking;
    else if (branch == "skewed")
        s.branch = exp::SteadyBranch::Skewed;
    else
        throw std::invalid_argument("branch must be thermal, sinking or skewed");
    Reader pr = r.child("params");
    auto& P = s.params;
    P.Pr = pr.num("Pr", P.Pr);
    P.Le = pr.num("Le", P.Le);
    P.Ra = pr.num("Ra", P.Ra);
    P.kappa = pr.num("kappa", P.kappa);
    P.L = pr.num("L", P.L);
    P.H = pr.num("H", P.H);
    P.nu = pr.num("nu", P.nu);
    P.delta = pr.num("delta", P.delta);
    P.sigma = pr.num("sigma", P.sigma);
    r.put("params", pr.finish());
    s.validate();
    echo = json::object();
    return s;
}

bouss::Scheme read_scheme(Reader& r) {
    const auto s = r.text("scheme", "crank-nicolson");
    if (s == "crank-nicolson") return bouss::Scheme::CrankNicolson;
    if (s == "implicit-euler") return bouss::Scheme::ImplicitEuler;
    throw std::invalid_argument("scheme must be crank-nicolson or implicit-euler");
}

bouss::Field read_field(const std::string& s) {
    if (s == "omega") return bouss::Field::Omega;
    if (s == "T") return bouss::Field::T;
    if (s == "S") return bouss::Field::S;
    throw std::invalid_argument("field must be omega, T or S");
}

std::string field_name(bouss::Field f) {
    switch (f) {
    case bouss::Field::Omega: return "omega";
    case bouss::Field::T: return "T";
    case bouss::Field::S: return "S";
    }
    return "?";
}

std::vector<exp::ObservableSpec> read_observables(Reader& r, const std::vector<exp::ObservableSpec>& def) {
    std::vector<exp::ObservableSpec> out;
    if (!r.has("observables")) {
        out = def;
    } else {
        const json& arr = r.raw("observables");
        if (!arr.is_array()) throw std::invalid_argument("observables must be an array");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            Reader o(arr[k], "observables[" + std::to_string(k) + "]");
            exp::ObservableSpec s;
            s.name = o.text("name", "");
            const std::string kind = o.text("kind", "indicator");
            if (kind == "indicator") {
                s.kind = exp::ObservableKind::Indicator;
                s.field = read_field(o.text("field", "omega"));
                const auto b = o.nums("box", {});
                if (b.size() != 4) throw std::invalid_argument("indicator box must be [x1_lo, x1_hi, x2_lo, x2_hi]");
                s.box = {b[0], b[1], b[2], b[3]};
            } else if (kind == "eigen") {
                s.kind = exp::ObservableKind::Adjoint;
                s.index = static_cast<int>(o.integer("index", 2));
            } else {
                throw std::invalid_argument("observable kind must be indicator or eigen");
            }
            if (o.has("expect_slope")) {
                const auto w = o.nums("expect_slope", {});
                if (w.size() != 2) throw std::invalid_argument("expect_slope must be [lo, hi]");
                s.expect_slope = std::make_pair(w[0], w[1]);
            }
            o.finish();
            out.push_back(s);
        }
    }
    json echo = json::array();
    for (const auto& s : out) {
        json j{{"name", s.name}};
        if (s.kind == exp::ObservableKind::Indicator) {
            j["kind"] = "indicator";
            j["field"] = field_name(s.field);
            j["box"] = {s.box.x1_lo, s.box.x1_hi, s.box.x2_lo, s.box.x2_hi};
        } else {
            j["kind"] = "eigen";
            j["index"] = s.index;
        }
        if (s.expect_slope) j["expect_slope"] = {s.expect_slope->first, s.expect_slope->second};
        echo.push_back(j);
    }
    r.put("observables", echo);
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

Check within(const std::string& name, double value, double lo, double hi) {
    return {name, value >= lo && value <= hi, value, "expected in [" + fmt(lo) + ", " + fmt(hi) + "]"};
}

Check below(const std::string& name, double value, double limit) {
    return {name, value < limit, value, "expected < " + fmt(limit)};
}

Check above(const std::string& name, double value, double limit) {
    return {name, value > limit, value, "expected > " + fmt(limit)};
}

/// Bookkeeping shared by the experiment bodies.
struct Context {
    fs::path out;
    std::string experiment;
    int threads = 1;
    std::optional<exp::SeedRange> seeds;
    RunReport* report = nullptr;

    CsvWriter csv(const std::string& name, std::vector<std::string> header) {
        const fs::path p = out / name;
        report->files.push_back(p);
        return CsvWriter(p, std::move(header));
    }
    void check(Check c) { report->checks.push_back(std::move(c)); }
    exp::SeedRange seeds_or(Reader& r, exp::SeedRange def) {
        auto s = read_seeds(r, def);
        if (seeds) {
            s = *seeds;
            r.put("seeds", {s.first, s.last});
        }
        return s;
    }
};

using Body = std::function<void(Reader&, Context&)>;

void run_selftest(Reader& r, Context& ctx) {
    exp::SelftestConfig c;
    c.models = static_cast<int>(r.integer("models", c.models));
    c.max_slots = to_size(r.integer("max_slots", static_cast<long long>(c.max_slots)), "max_slots");
    c.taus = r.nums("taus", c.taus);
    c.seed = static_cast<std::uint64_t>(r.integer("seed", static_cast<long long>(c.seed)));
    c.distances = r.nums("distances", c.distances);
    r.finish();
    c.validate();
    const auto res = exp::spectral_selftest(c);
    auto o = ctx.csv("selftest_oracle.csv", {"model", "slots", "tau", "rel_error"});
    for (const auto& x : res.oracle) o.row({(long long)x.model, (long long)x.slots, x.tau, x.rel_error});
    auto l = ctx.csv("selftest_lyapunov.csv", {"model", "i", "j", "residual"});
    for (const auto& x : res.lyapunov) l.row({(long long)x.model, (long long)x.i, (long long)x.j, x.residual});
    auto e = ctx.csv("selftest_exponents.csv", {"family", "chain", "predicted", "fitted"});
    for (const auto& x : res.exponents) e.row({x.family, (long long)x.chain, (long long)x.predicted, x.fitted});
    ctx.check(below("oracle relative error", res.max_oracle_error, 1e-8));
    ctx.check(below("Lyapunov identity residual", res.max_lyapunov_residual, 1e-12));
    ctx.check(below("divergence exponent error", res.max_exponent_error, 0.05));
}

void run_heat_scaling(Reader& r, Context& ctx) {
    exp::HeatScalingConfig c;
    json echo;
    c.heat = read_heat(r.child("heat"), heat::BoundaryKind::Neumann, -0.1, echo);
    r.put("heat", echo);
    c.p_list = r.nums("p_list", c.p_list);
    c.mode = to_size(r.integer("mode", 0), "mode");
    c.dt = r.num("dt", c.dt);
    c.t_end = r.num("t_end", c.t_end);
    c.seeds = ctx.seeds_or(r, c.seeds);
    Reader ac = r.child("autocorr");
    c.autocorr_p = ac.num("p", c.autocorr_p);
    c.autocorr_t_end = ac.num("t_end", c.autocorr_t_end);
    c.autocorr_max_lag = ac.num("max_lag", c.autocorr_max_lag);
    r.put("autocorr", ac.finish());
    r.finish();
    c.validate();
    const auto res = exp::heat_neumann_scaling(c, ctx.experiment, ctx.threads);
    auto s = ctx.csv("heat_scaling.csv", {"p", "mode", "rate", "theory", "mc_mean_log10", "mc_std_log10"});
    auto sm = ctx.csv("heat_scaling_samples.csv", {"p", "mode", "seed", "variance"});
    for (const auto& x : res.rows) {
        s.row({x.p, (long long)c.mode, x.rate, x.theory, x.mc_mean_log10, x.mc_std_log10});
        for (std::size_t k = 0; k < x.per_seed.size(); ++k)
            sm.row({x.p, (long long)c.mode, (long long)c.seeds.at(k), x.per_seed[k]});
    }
    auto f = ctx.csv("heat_scaling_fit.csv", {"kind", "fitted_slope", "predicted_slope"});
    f.row({std::string("theory"), res.theory_slope, -1.0});
    f.row({std::string("monte_carlo"), res.mc_slope, -1.0});
    ctx.check(within("closed-form slope", res.theory_slope, -1.0 - 1e-6, -1.0 + 1e-6));
    ctx.check(within("Monte-Carlo slope", res.mc_slope, -1.15, -0.85));
    if (c.autocorr_t_end > 0.0) {
        auto a = ctx.csv("heat_autocorr.csv", {"tau", "estimate", "theory"});
        for (const auto& x : res.autocorr) a.row({x.tau, x.estimate, x.theory});
        ctx.check(below("autocorrelation L2 error", res.autocorr_l2, 1e-2));
    }
}

void run_heat_weighted(Reader& r, Context& ctx) {
    exp::HeatWeightedConfig c;
    json echo;
    c.heat = read_heat(r.child("heat"), heat::BoundaryKind::Dirichlet, 1.0, echo);
    r.put("heat", echo);
    c.alpha = r.num("alpha", c.alpha);
    c.distances = r.nums("distances", c.distances);
    std::vector<long long> modes(c.modes.begin(), c.modes.end());
    modes = r.integers("report_modes", modes);
    c.modes.clear();
    for (auto m : modes) c.modes.push_back(to_size(m, "report_modes"));
    c.k_small = to_size(r.integer("k_small", (long long)c.k_small), "k_small");
    c.k_large = to_size(r.integer("k_large", (long long)c.k_large), "k_large");
    r.finish();
    c.validate();
    const auto res = exp::heat_dirichlet_weighted(c);
    auto w = ctx.csv("heat_weighted.csv", {"p", "rate", "mode", "value"});
    for (const auto& x : res.rows) w.row({x.p, x.rate, (long long)x.mode, x.value});
    auto f = ctx.csv("heat_weighted_fit.csv", {"mode", "fitted_slope", "predicted_slope"});
    for (std::size_t k = 0; k < c.modes.size(); ++k)
        f.row({(long long)c.modes[k], res.slopes[k], c.modes[k] == 0 ? res.predicted_slope : std::nan("")});
    auto wp = ctx.csv("heat_weighted_wellposedness.csv", {"k_small", "k_large", "ratio"});
    wp.row({(long long)c.k_small, (long long)c.k_large, res.wellposedness_ratio});
    for (std::size_t k = 0; k < c.modes.size(); ++k)
        if (c.modes[k] == 0)
            ctx.check(within("weighted leading-mode slope", res.slopes[k], res.predicted_slope - 0.05,
                             res.predicted_slope + 0.05));
    ctx.check(above("truncated trace growth ratio", res.wellposedness_ratio, 2.0));
}

void run_wellposedness(Reader& r, Context& ctx) {
    exp::WellposednessConfig c;
    json echo;
    c.heat = read_heat(r.child("heat"), heat::BoundaryKind::Neumann, -0.1, echo);
    r.put("heat", echo);
    std::vector<long long> k(c.modes.begin(), c.modes.end());
    k = r.integers("truncations", k);
    c.modes.clear();
    for (auto v : k) c.modes.push_back(to_size(v, "truncations"));
    r.finish();
    c.validate();
    const auto res = exp::heat_wellposedness(c);
    auto w = ctx.csv("heat_wellposedness.csv", {"bc", "modes", "value"});
    for (const auto& x : res.rows)
        w.row({std::string(x.bc == heat::BoundaryKind::Neumann ? "neumann" : "dirichlet"), (long long)x.modes, x.value});
    ctx.check(below("Neumann trace tail ratio", res.neumann_tail_ratio, 1.01));
    ctx.check(above("Dirichlet trace growth ratio", res.dirichlet_growth_ratio, 2.0));
}

void run_branch(Reader& r, Context& ctx) {
    exp::BranchConfig c;
    json echo;
    c.setup = read_bouss(r, 1, echo);
    const bool r2 = c.setup.params.prescribed_surface_temperature();
    c.p_list = r.nums("p_list", r2 ? std::vector<double>{0.3, 1.3} : c.p_list);
    c.arclength = r.flag("arclength", r2);
    c.ds = r.num("ds", c.ds);
    c.ds_max = r.num("ds_max", c.ds_max);
    c.eigs_every = static_cast<int>(r.integer("eigs_every", 0));
    std::pair<double, double> expect = r2 ? std::make_pair(0.93, 1.13) : std::make_pair(0.050, 0.066);
    if (r.has("crossing") || !r2) {
        Reader cr = r.child("crossing");
        const auto b = cr.nums("bracket", {0.055, 0.07});
        if (b.size() != 2) throw std::invalid_argument("crossing.bracket must be [lo, hi]");
        c.crossing_bracket = std::make_pair(b[0], b[1]);
        const auto g = cr.integers("grids", {19, 39});
        if (g.size() % 2 != 0 || g.empty()) throw std::invalid_argument("crossing.grids must list M, N pairs");
        for (std::size_t k = 0; k < g.size(); k += 2) c.crossing_grids.emplace_back(int(g[k]), int(g[k + 1]));
        r.put("crossing", cr.finish());
    }
    const auto e = r.nums("expect_threshold", {expect.first, expect.second});
    if (e.size() != 2) throw std::invalid_argument("expect_threshold must be [lo, hi]");
    r.finish();
    c.validate();
    const auto res = exp::bouss_branch(c, ctx.threads);
    auto b = ctx.csv("bouss_branch.csv",
                     {"p", "max_psi", "min_psi", "arclength", "dp_ds", "re_lambda2", "im_lambda2", "stable"});
    for (const auto& x : res.rows)
        b.row({x.p, x.max_psi, x.min_psi, x.arclength, x.dp_ds, x.lead.real(), x.lead.imag(), (long long)x.stable});
    auto t = ctx.csv("bouss_threshold.csv",
                     {"kind", "M", "N", "p", "lower", "upper", "re_lambda2_lower", "re_lambda2_upper"});
    for (const auto& x : res.thresholds)
        t.row({x.kind, (long long)x.M, (long long)x.N, x.p, x.lower, x.upper, x.re_lambda2_lower, x.re_lambda2_upper});
    if (c.arclength && res.thresholds.empty())
        ctx.check({"fold detected", false, 0.0, "continuation stopped: " + res.stop_reason});
    for (std::size_t k = 0; k < res.thresholds.size(); ++k) {
        const auto& x = res.thresholds[k];
        const std::string tag = x.kind + " (" + std::to_string(x.M) + "," + std::to_string(x.N) + ")";
        ctx.check(within(tag + " threshold", x.p, e[0], e[1]));
        if (x.kind == "pitchfork") {
            ctx.check({tag + " lambda_2 changes sign", x.re_lambda2_lower < 0.0 && x.re_lambda2_upper > 0.0,
                       x.re_lambda2_upper, "Re lambda_2 below and above the crossing: " + fmt(x.re_lambda2_lower) +
                                               ", " + fmt(x.re_lambda2_upper)});
            if (k > 0)
                ctx.check({tag + " threshold increases with resolution", x.p > res.thresholds[k - 1].p, x.p,
                           "previous grid: " + fmt(res.thresholds[k - 1].p)});
        }
    }
}

void run_eigs(Reader& r, Context& ctx) {
    exp::EigsConfig c;
    json echo;
    c.setup = read_bouss(r, 1, echo);
    c.p_list = r.nums("p_list", c.setup.params.prescribed_surface_temperature() ? std::vector<double>{1.0}
                                                                                  : c.p_list);
    c.count = static_cast<Eigen::Index>(r.integer("count", c.count));
    c.dump_state = r.flag("dump_state", false);
    for (auto i : r.integers("dump_vectors", {})) c.dump_vectors.push_back(static_cast<int>(i));
    r.finish();
    c.validate();
    const auto res = exp::bouss_eigs(c, ctx.threads);
    auto e = ctx.csv("bouss_eigs.csv", {"p", "index", "re", "im", "residual"});
    for (const auto& x : res.rows) e.row({x.p, (long long)x.index, x.value.real(), x.value.imag(), x.residual});
    auto s = ctx.csv("bouss_eigs_summary.csv", {"p", "max_psi", "lambda1_abs", "zero_direction_deviation",
                                                "re_lambda2", "im_lambda2", "re_lambda4", "im_lambda4",
                                                "gap_re_2_4"});
    for (const auto& x : res.summary) {
        s.row({x.p, x.max_psi, x.zero_modulus, x.zero_direction_deviation, x.lambda2.real(), x.lambda2.imag(),
               x.lambda4.real(), x.lambda4.imag(), x.lambda2.real() - x.lambda4.real()});
        ctx.check(below("|lambda_1| at p = " + fmt(x.p), x.zero_modulus, 1e-8));
        ctx.check(below("structural zero direction at p = " + fmt(x.p), x.zero_direction_deviation, 1e-6));
    }
    if (!res.fields.empty()) {
        auto g = ctx.csv("bouss_fields.csv", {"p", "name", "field", "i", "j", "x1", "x2", "re", "im"});
        for (const auto& x : res.fields)
            g.row({x.p, x.name, x.field, (long long)x.i, (long long)x.j, x.x1, x.x2, x.value.real(), x.value.imag()});
    }
}

void run_variance(Reader& r, Context& ctx) {
    exp::VarianceConfig c;
    json echo;
    c.setup = read_bouss(r, 1, echo);
    const bool r2 = c.setup.params.prescribed_surface_temperature();
    c.p_list = r.nums("p_list", r2 ? std::vector<double>{0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}
                                   : std::vector<double>{0.035, 0.04, 0.045, 0.05, 0.055, 0.06});
    c.seeds = ctx.seeds_or(r, {0, 2});
    c.t_end = r.num("t_end", c.t_end);
    c.dt = r.num("dt", c.dt);
    c.scheme = read_scheme(r);
    const std::string sys = r.text("system", "linearized");
    if (sys != "linearized" && sys != "nonlinear") throw std::invalid_argument("system must be linearized or nonlinear");
    c.nonlinear = sys == "nonlinear";
    c.jump_threshold = r.num("jump_threshold", c.jump_threshold);
    const bool expect_no_jump = r.flag("expect_no_jump", false);
    c.trajectory_stride = to_size(r.integer("trajectory_stride", 0), "trajectory_stride");
    std::vector<exp::ObservableSpec> def;
    if (r2) {
        def.push_back({"e2", exp::ObservableKind::Adjoint, {}, {}, 2, std::make_pair(0.7, 1.3)});
        def.push_back({"e4", exp::ObservableKind::Adjoint, {}, {}, 4, std::make_pair(-1e9, 0.3)});
    } else {
        def.push_back({"omega", exp::ObservableKind::Indicator, bouss::Field::Omega, {-0.5, -0.2, 3.0, 4.0}, 2,
                       std::make_pair(0.7, 1.3)});
        def.push_back({"T", exp::ObservableKind::Indicator, bouss::Field::T, {-0.3, -0.05, 3.0, 9.0}, 2,
                       std::make_pair(0.7, 1.3)});
    }
    c.observables = read_observables(r, def);
    r.finish();
    c.validate();
    const auto res = exp::bouss_variance(c, ctx.experiment, ctx.threads);
    auto s = ctx.csv("bouss_variance_samples.csv", {"p", "seed", "observable", "variance", "jumped"});
    for (const auto& x : res.samples) s.row({x.p, (long long)x.seed, x.observable, x.variance, (long long)x.jumped});
    if (c.trajectory_stride > 0) {
        auto tr = ctx.csv("bouss_trajectory.csv", {"p", "seed", "observable", "t", "re", "im"});
        for (const auto& x : res.trajectories)
            tr.row({x.p, (long long)x.seed, x.observable, x.t, x.value.real(), x.value.imag()});
    }
    auto v = ctx.csv("bouss_variance.csv", {"p", "observable", "mean_log10_var", "std_log10_var", "re_lambda2",
                                            "im_lambda2", "log10_rate", "re_lambda_obs", "im_lambda_obs",
                                            "log10_rate_obs"});
    for (const auto& x : res.rows)
        v.row({x.p, x.observable, x.mean_log10, x.std_log10, x.lambda2.real(), x.lambda2.imag(), x.log10_rate,
               x.lambda_obs.real(), x.lambda_obs.imag(), std::log10(-1.0 / x.lambda_obs.real())});
    auto f = ctx.csv("bouss_variance_fit.csv", {"observable", "slope", "offset", "rms"});
    for (std::size_t k = 0; k < res.fits.size(); ++k) {
        const auto& x = res.fits[k];
        f.row({x.observable, x.fit.slope, x.fit.offset, x.fit.rms});
        if (c.observables[k].expect_slope)
            ctx.check(within("variance slope along " + x.observable, x.fit.slope, c.observables[k].expect_slope->first,
                             c.observables[k].expect_slope->second));
    }
    if (expect_no_jump) {
        long long jumps = 0;
        for (const auto& x : res.samples) jumps += x.jumped ? 1 : 0;
        ctx.check({"no basin jump", jumps == 0, double(jumps), "samples flagged as jumped"});
    }
}

void run_autocorr(Reader& r, Context& ctx) {
    exp::AutocorrConfig c;
    json echo;
    c.setup = read_bouss(r, 2, echo);
    c.p_list = r.nums("p_list", c.p_list);
    std::vector<long long> idx(c.indices.begin(), c.indices.end());
    idx = r.integers("indices", idx);
    c.indices.assign(idx.begin(), idx.end());
    c.seeds = ctx.seeds_or(r, c.seeds);
    c.t_end = r.num("t_end", c.t_end);
    c.dt = r.num("dt", c.dt);
    c.max_lag = r.num("max_lag", c.max_lag);
    c.scheme = read_scheme(r);
    c.max_l2 = r.num("max_l2", 5e-2);
    r.finish();
    c.validate();
    const auto res = exp::bouss_autocorr(c, ctx.experiment, ctx.threads);
    auto a = ctx.csv("bouss_autocorr.csv", {"p", "index", "tau", "estimate_abs", "theory_abs"});
    auto s = ctx.csv("bouss_autocorr_summary.csv", {"p", "index", "re_lambda", "im_lambda", "l2_error"});
    for (const auto& cv : res.curves) {
        for (const auto& x : cv.points) a.row({cv.p, (long long)cv.index, x.tau, x.estimate, x.theory});
        s.row({cv.p, (long long)cv.index, cv.lambda.real(), cv.lambda.imag(), cv.l2});
        ctx.check(below("autocorrelation L2 error, index " + std::to_string(cv.index) + ", p = " + fmt(cv.p), cv.l2,
                        *c.max_l2));
    }
}

void run_symmetry(Reader& r, Context& ctx) {
    exp::SymmetryConfig c;
    json echo;
    c.setup = read_bouss(r, 1, echo);
    if (!r.has("branch")) {
        c.setup.branch = exp::SteadyBranch::Sinking;
        r.put("branch", "sinking");
    }
    c.p = r.num("p", c.p);
    c.leading = static_cast<Eigen::Index>(r.integer("leading", c.leading));
    r.finish();
    c.validate();
    const auto res = exp::bouss_symmetry(c);
    auto s = ctx.csv("bouss_symmetry.csv", {"quantity", "value"});
    s.row({std::string("state_residual"), res.state_residual});
    s.row({std::string("mirror_residual"), res.mirror_residual});
    s.row({std::string("max_psi"), res.max_psi});
    s.row({std::string("min_psi"), res.min_psi});
    s.row({std::string("asymmetry"), res.asymmetry});
    s.row({std::string("spectrum_mismatch"), res.spectrum_mismatch});
    s.row({std::string("leading_mismatch"), res.leading_mismatch});
    s.row({std::string("roundoff_mismatch"), res.roundoff_mismatch});
    auto e = ctx.csv("bouss_symmetry_spectrum.csv", {"index", "re_state", "im_state", "re_mirror", "im_mirror"});
    for (Eigen::Index k = 0; k < res.state_values.size(); ++k)
        e.row({(long long)k + 1, res.state_values[k].real(), res.state_values[k].imag(), res.mirror_values[k].real(),
               res.mirror_values[k].imag()});
    ctx.check(above("state is asymmetric", res.asymmetry, 1e-3));
    ctx.check(below("mirror residual", res.mirror_residual, 1e-8));
    ctx.check(below("leading spectrum mismatch", res.leading_mismatch, 1e-6));
    ctx.check(below("whole spectrum mismatch over round-off floor", res.spectrum_mismatch / res.roundoff_mismatch,
                    10.0));
}

const std::map<std::string, Body>& bodies() {
    static const std::map<std::string, Body> m{
        {"spectral-selftest", run_selftest},     {"heat-neumann-scaling", run_heat_scaling},
        {"heat-dirichlet-weighted", run_heat_weighted}, {"heat-wellposedness", run_wellposedness},
        {"bouss-branch", run_branch},            {"bouss-eigs", run_eigs},
        {"bouss-variance", run_variance},        {"bouss-autocorr", run_autocorr},
        {"bouss-symmetry", run_symmetry},
    };
    return m;
}

std::string timestamp() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

}  // namespace

bool RunReport::all_passed() const {
    if (!completed) return false;
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : bodies()) v.push_back(k);
        return v;
    }();
    return names;
}

exp::SeedRange parse_seed_range(std::string_view text) {
    auto parse = [&](std::string_view s) {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos)
            throw std::invalid_argument("seed range must look like a..b");
        return static_cast<std::uint64_t>(std::stoull(std::string(s)));
    };
    const auto dots = text.find("..");
    exp::SeedRange r;
    if (dots == std::string_view::npos) {
        r.first = r.last = parse(text);
    } else {
        r.first = parse(text.substr(0, dots));
        r.last = parse(text.substr(dots + 2));
    }
    r.validate();
    return r;
}

RunReport run(const RunOptions& opt) {
    RunReport report;
    fs::create_directories(opt.out);
    const auto start = std::chrono::steady_clock::now();
    json manifest{{"experiment", opt.experiment}, {"threads", opt.threads}, {"started_at", timestamp()}};
    manifest["versions"] = {{"ews", kVersion},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                          "." + std::to_string(EIGEN_MINOR_VERSION)},
                            {"compiler", __VERSION__},
                            {"cplusplus", __cplusplus}};
    try {
        const auto it = bodies().find(opt.experiment);
        if (it == bodies().end()) throw std::invalid_argument("unknown experiment '" + opt.experiment + "'");
        if (opt.threads < 1) throw std::invalid_argument("--threads must be at least 1");
        json cfg = json::object();
        if (opt.config) {
            std::ifstream in(*opt.config);
            if (!in) throw std::invalid_argument("cannot read config " + opt.config->string());
            try {
                cfg = json::parse(in);
            } catch (const json::parse_error& e) {
                throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
            }
        }
        if (cfg.contains("experiment")) {
            if (cfg["experiment"] != opt.experiment)
                throw std::invalid_argument("config is for experiment " + cfg["experiment"].dump());
            cfg.erase("experiment");
        }
        Reader reader(cfg, "config");
        Context ctx{opt.out, opt.experiment, opt.threads, opt.seeds, &report};
        try {
            it->second(reader, ctx);
        } catch (...) {
            manifest["config"] = reader.finish();
            throw;
        }
        manifest["config"] = reader.finish();
        report.completed = true;
    } catch (const std::exception& e) {
        report.failure = e.what();
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest["wall_seconds"] = report.wall_seconds;
    manifest["status"] = report.completed ? (report.all_passed() ? "passed" : "check failed") : "error";
    if (!report.failure.empty()) manifest["failure_reason"] = report.failure;
    json checks = json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"detail", c.detail}});
    manifest["checks"] = checks;
    json files = json::array();
    for (const auto& f : report.files) files.push_back(f.filename().string());
    manifest["files"] = files;
    if (opt.seeds) manifest["seeds"] = {opt.seeds->first, opt.seeds->last};
    std::ofstream(opt.out / "manifest.json") << manifest.dump(2) << '\n';
    return report;
}

int exit_status(const RunReport& r) {
    if (!r.completed) return 2;
    return r.all_passed() ? 0 : 1;
}

int main_entry(int argc, char** argv) {
    CLI::App app{"Early-warning signal experiments"};
    RunOptions opt;
    std::string config, seeds;
    bool list = false;
    app.add_option("--experiment,-e", opt.experiment, "Experiment name");
    app.add_option("--config,-c", config, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--out,-o", opt.out, "Output directory")->capture_default_str();
    app.add_option("--seeds", seeds, "Inclusive seed range a..b");
    app.add_option("--threads,-j", opt.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_flag("--list", list, "List experiment names and exit");
    CLI11_PARSE(app, argc, argv);
    if (list) {
        for (const auto& n : experiment_names()) std::cout << n << '\n';
        return 0;
    }
    if (opt.experiment.empty()) {
        std::cerr << "--experiment is required (see --list)\n";
        return 2;
    }
    if (!config.empty()) opt.config = config;
    try {
        if (!seeds.empty()) opt.seeds = parse_seed_range(seeds);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    const RunReport r = run(opt);
    for (const auto& c : r.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << fmt(c.value) << " (" << c.detail << ")\n";
    if (!r.completed) std::cerr << "error: " << r.failure << '\n';
    std::cout << "wrote " << r.files.size() << " files and manifest.json to " << opt.out.string() << " in "
              << fmt(r.wall_seconds) << " s\n";
    return exit_status(r);
}

}  // namespace ews::cli
