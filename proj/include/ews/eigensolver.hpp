#pragma once

/// Dense nonsymmetric eigendecomposition with adjoint vectors taken with
/// respect to the weighted inner product <a, b>_W = sum_k W_k a_k conj(b_k).

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace ews::eig {

using cplx = std::complex<double>;

/// Matrix-free linear map on R^n.
struct DiscreteOperator {
    Eigen::Index n = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
};

/// Dense matrix of the operator, assembled column by column.
Eigen::MatrixXd densify(const DiscreteOperator& op, Eigen::Index cap = 6000);

enum class Backend { Lapack, Eigen };

struct EigOptions {
    Backend backend = Backend::Lapack;
    bool vectors = true;
    /// Number of leading eigenpairs whose vectors are kept (0 keeps all).
    Eigen::Index keep_vectors = 0;
};

/// Eigenpairs sorted by descending real part; within a conjugate pair the
/// member with negative imaginary part comes first.
struct EigenSet {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd right;  ///< unit W-norm, largest entry real positive
    Eigen::MatrixXcd left;   ///< <left_i, right_j>_W = delta_ij
    Eigen::VectorXd weights;
    Eigen::VectorXd residuals;  ///< ||A v - lambda v|| / ||v|| for stored vectors

    Eigen::Index size() const { return values.size(); }
    Eigen::Index vector_count() const { return right.cols(); }
};

EigenSet eig_dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& weights, EigOptions opt = {});

/// W-weighted inner product.
cplx inner(const Eigen::Ref<const Eigen::VectorXcd>& a, const Eigen::Ref<const Eigen::VectorXcd>& b,
           const Eigen::VectorXd& weights);

/// First m entries of an EigenSet (with vectors where available).
EigenSet leading_eigs(const EigenSet& set, Eigen::Index m);

struct TrackedSpectrum {
    std::vector<double> p;
    Eigen::MatrixXcd values;  ///< one row per p, columns keep their label along the sweep
    std::vector<bool> ambiguous;
};

/// Nearest-neighbour matching of the leading m eigenvalues between
/// consecutive parameter values. Labels at the first p follow the sort order.
TrackedSpectrum track_branch_eigs(const std::vector<double>& p, const std::vector<Eigen::VectorXcd>& spectra,
                                  Eigen::Index m);

/// G_ij = sum_c <left_i, n_c>_W conj(<left_j, n_c>_W) for the first m left vectors.
Eigen::MatrixXcd coupling_from_noise(const EigenSet& set, const Eigen::MatrixXd& noise_map, Eigen::Index m);

}  // namespace ews::eig
