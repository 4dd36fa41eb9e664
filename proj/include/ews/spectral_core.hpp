#pragma once

/// Closed-form stationary auto-covariances of a linear SPDE with boundary
/// noise, expressed in the eigenbasis of the adjoint operator.
///
/// Conventions:
///  - inner products are linear in the first slot and conjugate-linear in the
///    second;
///  - blocks are 0-based; levels inside a Jordan chain are 1-based, level 0
///    stands for the zero vector;
///  - the coupling matrix G is indexed by flat slot index and satisfies
///    G(s, t) = <e*_s, X e*_t> with X = D B B* D*.

#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace ews::spectral {

using cplx = std::complex<double>;

/// An eigenvalue lambda_i of A together with the length of its Jordan chain.
struct JordanBlock {
    cplx eigenvalue;
    std::size_t multiplicity = 1;
};

/// Address of a chain vector e*_{block, level}.
struct SlotIndex {
    std::size_t block = 0;
    std::size_t level = 1;
    auto operator<=>(const SlotIndex&) const = default;
};

/// Thrown when lambda_i-bar + lambda_j is numerically zero.
class DegenerateDenominator : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Thrown when a direction has no component on the leading block, so no
/// divergence exponent can be predicted.
class SilencedSign : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Spectral data of the linearised problem at one value of the control
/// parameter.
class SpectralModel {
public:
    SpectralModel() = default;
    SpectralModel(double p, double threshold, std::vector<JordanBlock> blocks, double q,
                  Eigen::MatrixXcd coupling);

    double p() const { return p_; }
    double threshold() const { return threshold_; }
    double q() const { return q_; }
    const std::vector<JordanBlock>& blocks() const { return blocks_; }
    const Eigen::MatrixXcd& coupling() const { return coupling_; }

    std::size_t block_count() const { return blocks_.size(); }
    std::size_t slot_count() const { return slot_count_; }
    /// Flat slot index of e*_{block, level}; level must be in [1, multiplicity].
    std::size_t slot(SlotIndex s) const;
    /// Coupling entry with the level-0 convention G(., 0) = G(0, .) = 0.
    cplx coupling_at(SlotIndex a, SlotIndex b) const;
    const JordanBlock& block(std::size_t i) const;

    /// Checks ordering, Hermitian positive semi-definite coupling, q away from
    /// the spectrum and stability below threshold. Throws std::invalid_argument.
    void validate() const;

private:
    double p_ = 0.0;
    double threshold_ = 0.0;
    std::vector<JordanBlock> blocks_;
    double q_ = 0.0;
    Eigen::MatrixXcd coupling_;
    std::vector<std::size_t> offsets_;
    std::size_t slot_count_ = 0;
};

/// Sparse coefficients of a direction f on the adjoint chain vectors e*_{i,k}.
struct DirectionCoeffs {
    std::map<SlotIndex, cplx> coeffs;

    void set(SlotIndex s, cplx c) { coeffs[s] = c; }
    cplx get(SlotIndex s) const;
};

/// Memoising evaluator of <e*_{i,k1}, V^tau e*_{j,k2}>.
class AutocovEvaluator {
public:
    explicit AutocovEvaluator(const SpectralModel& model);

    cplx jordan(SlotIndex a, SlotIndex b, double tau);
    std::size_t cache_size() const { return cache_.size(); }

private:
    struct Key {
        std::size_t i, k1, j, k2;
        double tau;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const;
    };

    cplx forcing(std::size_t i, std::size_t k1, std::size_t j, std::size_t k2, double tau) const;

    const SpectralModel& model_;
    std::unordered_map<Key, cplx, KeyHash> cache_;
};

/// <e*_{i,1}, V^tau e*_{j,1}>.
cplx autocov_pair(const SpectralModel& model, std::size_t i, std::size_t j, double tau);

/// <e*_{i,k1}, V^tau e*_{j,k2}> for arbitrary chain levels.
cplx autocov_jordan(const SpectralModel& model, SlotIndex a, SlotIndex b, double tau);

/// Full slot-by-slot matrix of <e*_a, V^tau e*_b>.
Eigen::MatrixXcd autocov_matrix(const SpectralModel& model, double tau);

/// <f1, V^tau f2> for directions inside the span of the chain vectors.
cplx autocov_subspace(const DirectionCoeffs& f1, const DirectionCoeffs& f2, double tau,
                      const SpectralModel& model);

/// Divergence exponent of <e*_{1,k1}, V e*_{1,k2}> in the distance to threshold.
int predicted_exponent_pair(std::size_t k1, std::size_t k2);

/// Divergence exponent for two general directions, taken from their highest
/// levels on the leading block. Throws SilencedSign if either has none.
int predicted_exponent_directions(const DirectionCoeffs& f1, const DirectionCoeffs& f2,
                                  const SpectralModel& model);

/// Leading-order autocorrelation of the e*_{i,1} projection at lag tau.
cplx autocorr_asymptotic(const SpectralModel& model, std::size_t i, double tau);

/// Adds a component along e*_{1,M1} when the direction has none, so that it
/// attains the maximal divergence rate. `norm_of_top` is the norm of
/// e*_{1,M1}; the added perturbation has norm delta / 4.
DirectionCoeffs densify_direction(const DirectionCoeffs& f, double delta, double norm_of_top,
                                  const SpectralModel& model);

struct ScalingSample {
    double p = 0.0;
    double value = 0.0;
    double rate = 0.0;  ///< distance to threshold, e.g. -Re(lambda_1)
};

struct ScalingFit {
    double exponent = 0.0;
    double offset = 0.0;
    double residual = 0.0;  ///< root-mean-square residual in log10 space
};

/// Least-squares fit of log10(value) = exponent * log10(rate) + offset.
ScalingFit fit_scaling_exponent(std::span<const ScalingSample> samples);

}  // namespace ews::spectral
