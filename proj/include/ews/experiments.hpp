#pragma once

/// Named experiments. Each one is a pure computation from a validated
/// configuration to a result record; writing files is left to the runner.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ews/boussinesq/model.hpp"
#include "ews/boussinesq/stepping.hpp"
#include "ews/eigensolver.hpp"
#include "ews/heat1d.hpp"

namespace ews::exp {

using cplx = std::complex<double>;

/// Inclusive range of seed numbers.
struct SeedRange {
    std::uint64_t first = 0;
    std::uint64_t last = 4;
    std::size_t count() const { return static_cast<std::size_t>(last - first + 1); }
    std::uint64_t at(std::size_t k) const { return first + k; }
    void validate() const;
};

/// Outcome of one acceptance-tagged comparison.
struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    std::string detail;
};

/// Least-squares line y = slope * x + offset.
struct LineFit {
    double slope = 0.0;
    double offset = 0.0;
    double rms = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// spectral-selftest

struct SelftestConfig {
    int models = 20;
    std::size_t max_slots = 8;
    std::vector<double> taus{0.0, 0.5, 2.0};
    std::uint64_t seed = 20240611;
    /// Distances to threshold used to fit divergence exponents.
    std::vector<double> distances{1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2};
    void validate() const;
};

struct OracleRow {
    int model = 0;
    std::size_t slots = 0;
    double tau = 0.0;
    double rel_error = 0.0;
};

struct LyapunovRow {
    int model = 0;
    std::size_t i = 0, j = 0;
    double residual = 0.0;  ///< relative to the larger side of the identity
};

struct ExponentRow {
    std::string family;
    std::size_t chain = 1;  ///< length of the leading Jordan chain
    int predicted = 0;
    double fitted = 0.0;
};

struct SelftestResult {
    std::vector<OracleRow> oracle;
    std::vector<LyapunovRow> lyapunov;
    std::vector<ExponentRow> exponents;
    double max_oracle_error = 0.0;
    double max_lyapunov_residual = 0.0;
    double max_exponent_error = 0.0;
};

SelftestResult spectral_selftest(const SelftestConfig& cfg);

// ---------------------------------------------------------------------------
// heat-neumann-scaling

struct HeatScalingConfig {
    heat::HeatConfig heat;  ///< p is overridden by the sweep
    std::vector<double> p_list{-0.4, -0.3, -0.2, -0.1, -0.05, -0.025};
    std::size_t mode = 0;
    double dt = 1e-2;
    double t_end = 1e3;
    SeedRange seeds;
    /// Autocorrelation comparison at a single p; skipped when t_end is zero.
    double autocorr_p = -5.0;
    double autocorr_t_end = 1e4;
    double autocorr_max_lag = 10.0;
    void validate() const;
};

struct HeatScalingRow {
    double p = 0.0;
    double rate = 0.0;  ///< distance to threshold
    double theory = 0.0;
    double mc_mean_log10 = 0.0;
    double mc_std_log10 = 0.0;
    std::vector<double> per_seed;
};

struct CurvePoint {
    double tau = 0.0;
    double estimate = 0.0;
    double theory = 0.0;
};

struct HeatScalingResult {
    std::vector<HeatScalingRow> rows;
    double theory_slope = 0.0;
    double mc_slope = 0.0;
    std::vector<CurvePoint> autocorr;
    double autocorr_l2 = 0.0;
};

HeatScalingResult heat_neumann_scaling(const HeatScalingConfig& cfg, const std::string& experiment, int threads);

// ---------------------------------------------------------------------------
// heat-dirichlet-weighted and heat-wellposedness

struct HeatWeightedConfig {
    heat::HeatConfig heat{heat::BoundaryKind::Dirichlet};
    double alpha = -0.6;
    /// Distances below the threshold p = (pi / L)^2.
    std::vector<double> distances{1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01};
    std::vector<std::size_t> modes{0, 1, 2};
    std::size_t k_small = 16;
    std::size_t k_large = 64;
    void validate() const;
};

struct HeatWeightedRow {
    double p = 0.0;
    double rate = 0.0;
    std::size_t mode = 0;
    double value = 0.0;
};

struct HeatWeightedResult {
    std::vector<HeatWeightedRow> rows;
    std::vector<double> slopes;  ///< one per mode, against the distance to threshold
    double predicted_slope = 0.0;
    double wellposedness_ratio = 0.0;
};

HeatWeightedResult heat_dirichlet_weighted(const HeatWeightedConfig& cfg);

struct WellposednessConfig {
    heat::HeatConfig heat;  ///< boundary kind is swept
    std::vector<std::size_t> modes{4, 8, 16, 32, 64, 128, 256};
    void validate() const;
};

struct WellposednessRow {
    heat::BoundaryKind bc = heat::BoundaryKind::Neumann;
    std::size_t modes = 0;
    double value = 0.0;
};

struct WellposednessResult {
    std::vector<WellposednessRow> rows;
    double neumann_tail_ratio = 0.0;      ///< value at the last K over the previous K
    double dirichlet_growth_ratio = 0.0;  ///< value at the last K over the first K
};

WellposednessResult heat_wellposedness(const WellposednessConfig& cfg);

// ---------------------------------------------------------------------------
// Boussinesq experiments

enum class SteadyBranch { Thermal, Sinking, Skewed };

struct BoussSetup {
    bouss::BoussinesqParams params;
    int M = 19;
    int N = 39;
    SteadyBranch branch = SteadyBranch::Thermal;
    void validate() const;
};

/// Steady states on the requested branch for an increasing list of p.
std::vector<Eigen::VectorXd> steady_states(const BoussSetup& setup, const std::vector<double>& p_list);

/// Eigenvalue of the linearization labelled as in the theory: index 1 is the
/// structural zero, the others follow by descending real part.
struct LabelledSpectrum {
    Eigen::VectorXcd values;       ///< values[i - 1] is lambda_i
    std::vector<Eigen::Index> order;  ///< position of lambda_i in the EigenSet
};
LabelledSpectrum label_spectrum(const eig::EigenSet& set);

struct BranchConfig {
    BoussSetup setup;
    /// Natural continuation points (regime 1) or the start and end of the
    /// arclength run (regime 2).
    std::vector<double> p_list{0.03, 0.035, 0.04, 0.045, 0.05, 0.055, 0.06};
    bool arclength = false;
    double ds = 0.05;
    double ds_max = 2.0;
    /// Compute leading eigenvalues on every k-th point; 0 disables.
    int eigs_every = 0;
    /// Pitchfork search: bracket on the thermal branch and the grids to test.
    std::optional<std::pair<double, double>> crossing_bracket;
    std::vector<std::pair<int, int>> crossing_grids;
    void validate() const;
};

struct BranchRow {
    double p = 0.0;
    double max_psi = 0.0;
    double min_psi = 0.0;
    double arclength = 0.0;
    double dp_ds = 0.0;
    cplx lead{std::nan(""), std::nan("")};  ///< lambda_2 when computed
    int stable = -1;                        ///< -1 when not computed
};

struct ThresholdRow {
    std::string kind;
    int M = 0, N = 0;
    double p = 0.0;
    double lower = 0.0, upper = 0.0;
    double re_lambda2_lower = std::nan("");
    double re_lambda2_upper = std::nan("");
};

struct BranchResult {
    std::vector<BranchRow> rows;
    std::vector<ThresholdRow> thresholds;
    std::string stop_reason;
};

BranchResult bouss_branch(const BranchConfig& cfg, int threads);

struct EigsConfig {
    BoussSetup setup;
    std::vector<double> p_list{0.055};
    Eigen::Index count = 8;
    /// Write the steady fields on the full grid.
    bool dump_state = false;
    /// Labels (<= count) whose right and left vectors are written on the grid.
    std::vector<int> dump_vectors;
    void validate() const;
};

/// One node value of a gridded field. `name` is "state", "right_k" or "left_k".
struct FieldSample {
    double p = 0.0;
    std::string name;
    std::string field;  ///< psi, omega, T or S
    int i = 0, j = 0;
    double x1 = 0.0, x2 = 0.0;
    cplx value;
};

struct EigsRow {
    double p = 0.0;
    int index = 0;
    cplx value;
    double residual = 0.0;
};

struct EigsSummary {
    double p = 0.0;
    double max_psi = 0.0;
    double zero_modulus = 0.0;
    double zero_direction_deviation = 0.0;
    cplx lambda2, lambda4;
};

struct EigsResult {
    std::vector<EigsRow> rows;
    std::vector<EigsSummary> summary;
    std::vector<FieldSample> fields;
};

EigsResult bouss_eigs(const EigsConfig& cfg, int threads);

enum class ObservableKind { Indicator, Adjoint };

struct ObservableSpec {
    std::string name;
    ObservableKind kind = ObservableKind::Indicator;
    bouss::Field field = bouss::Field::Omega;
    bouss::Rect box{0, 0, 0, 0};
    int index = 2;  ///< eigen-direction label for adjoint observables
    /// Acceptance window for the regression slope, when given.
    std::optional<std::pair<double, double>> expect_slope;
};

struct VarianceConfig {
    BoussSetup setup;
    std::vector<double> p_list;
    SeedRange seeds;
    double t_end = 1e3;
    double dt = 1e-2;
    bouss::Scheme scheme = bouss::Scheme::CrankNicolson;
    bool nonlinear = false;
    /// Basin-jump threshold on the salinity anomaly for the nonlinear system.
    double jump_threshold = std::numeric_limits<double>::infinity();
    std::vector<ObservableSpec> observables;
    /// Keep every k-th observable sample of each run; 0 keeps none.
    std::size_t trajectory_stride = 0;
    void validate() const;
};

struct TrajectorySample {
    double p = 0.0;
    std::uint64_t seed = 0;
    std::string observable;
    double t = 0.0;
    cplx value;
};

struct VarianceSample {
    double p = 0.0;
    std::uint64_t seed = 0;
    std::string observable;
    double variance = 0.0;
    bool jumped = false;
};

struct VarianceRow {
    double p = 0.0;
    std::string observable;
    double mean_log10 = 0.0;
    double std_log10 = 0.0;
    cplx lambda2;
    cplx lambda_obs{std::nan(""), std::nan("")};  ///< eigenvalue of an adjoint observable
    double log10_rate = 0.0;                        ///< log10(-1 / Re lambda_2)
};

struct VarianceFit {
    std::string observable;
    LineFit fit;
};

struct VarianceResult {
    std::vector<VarianceSample> samples;
    std::vector<TrajectorySample> trajectories;
    std::vector<VarianceRow> rows;
    std::vector<VarianceFit> fits;
};

VarianceResult bouss_variance(const VarianceConfig& cfg, const std::string& experiment, int threads);

struct AutocorrConfig {
    BoussSetup setup;
    std::vector<double> p_list{0.4, 1.0};
    std::vector<int> indices{2, 4};
    SeedRange seeds;
    double t_end = 1e3;
    double dt = 1e-2;
    double max_lag = 10.0;
    bouss::Scheme scheme = bouss::Scheme::CrankNicolson;
    std::optional<double> max_l2;
    void validate() const;
};

struct AutocorrCurve {
    double p = 0.0;
    int index = 0;
    cplx lambda;
    std::vector<CurvePoint> points;
    double l2 = 0.0;
};

struct AutocorrResult {
    std::vector<AutocorrCurve> curves;
};

AutocorrResult bouss_autocorr(const AutocorrConfig& cfg, const std::string& experiment, int threads);

struct SymmetryConfig {
    BoussSetup setup{bouss::BoussinesqParams::regime1(), 19, 39, SteadyBranch::Sinking};
    double p = 0.055;
    /// Number of leading eigenvalues (by real part) held to the tight tolerance.
    Eigen::Index leading = 200;
    void validate() const;
};

struct SymmetryResult {
    double state_residual = 0.0;
    double mirror_residual = 0.0;
    double max_psi = 0.0;
    double min_psi = 0.0;
    double asymmetry = 0.0;  ///< max |psi + reflected psi|
    double spectrum_mismatch = 0.0;          ///< whole spectrum
    double leading_mismatch = 0.0;           ///< first `leading` eigenvalues of the state
    double roundoff_mismatch = 0.0;          ///< spectrum of A_S against that of its transpose
    Eigen::VectorXcd state_values;
    Eigen::VectorXcd mirror_values;
};

SymmetryResult bouss_symmetry(const SymmetryConfig& cfg);

/// Largest relative distance between two spectra after nearest-neighbour
/// matching; the scale of each entry is max(|lambda|, 1). With count >= 0
/// only the first count entries of a are matched.
double spectrum_mismatch(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, Eigen::Index count = -1);

}  // namespace ews::exp
