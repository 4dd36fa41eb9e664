#pragma once

/// Linearization of the steady problem about a steady state, split into the
/// streamfunction block and the dynamic block [omega; T; S]:
///   0      = A11 psi + A12 v
///   dv/dt  = A21 psi + A22 v
/// so that dv/dt = A_S v with A_S = A22 - A21 A11^{-1} A12.

#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ews/boussinesq/model.hpp"
#include "ews/eigensolver.hpp"
#include "ews/spectral_core.hpp"

namespace ews::bouss {

struct LinearizationBlocks {
    SparseMatrix A11, A12, A21, A22;
    /// Cell areas of the dynamic unknowns.
    Eigen::VectorXd weights;
    /// Max-norm of the steady residual at the linearization point.
    double steady_residual = 0.0;
};

/// Slices the exact Jacobian. A non-steady input is accepted; its residual is
/// reported in steady_residual.
LinearizationBlocks assemble_linearization(const Model& model, const Eigen::VectorXd& x);

class SchurComplement {
public:
    explicit SchurComplement(LinearizationBlocks blocks);

    Eigen::Index size() const;
    const LinearizationBlocks& blocks() const;
    /// A22 v - A21 A11^{-1} A12 v using one sparse Poisson solve.
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
    /// Streamfunction slaved to a dynamic vector.
    Eigen::VectorXd stream(const Eigen::VectorXd& v) const;
    /// Matrix-free view; shares ownership of the factorization.
    eig::DiscreteOperator as_operator() const;
    /// Dense A_S assembled with one multi-right-hand-side Poisson solve.
    Eigen::MatrixXd dense() const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// |lambda_1| and the deviation of its right vector from the constant-S
/// direction, both measured on a dense eigendecomposition.
struct StructuralZeroCheck {
    double eigenvalue_modulus = 0.0;
    double direction_deviation = 0.0;
};

StructuralZeroCheck check_structural_zero(const Model& model, const eig::EigenSet& set);

/// Index of the eigenvalue closest to zero in a sorted set.
Eigen::Index structural_zero_index(const eig::EigenSet& set);

/// Dense eigendecomposition of A_S at a steady state.
eig::EigenSet steady_spectrum(const Model& model, const Eigen::VectorXd& x, eig::EigOptions opt = {});

/// Columns (q - A_S)^{-1} n_c for the surface noise channels.
Eigen::MatrixXd lifted_noise_map(const Eigen::MatrixXd& a_dense, const Eigen::MatrixXd& noise_map, double q);

/// Spectral model built from the first m eigenpairs after the structural
/// zero, all with unit multiplicity, with coupling from the lifted noise.
spectral::SpectralModel bouss_spectral_model(const Model& model, const Eigen::MatrixXd& a_dense,
                                             const eig::EigenSet& set, Eigen::Index m, double q, double threshold);

}  // namespace ews::bouss
