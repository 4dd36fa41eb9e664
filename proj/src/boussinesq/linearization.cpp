#include "ews/boussinesq/linearization.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SparseLU>

namespace ews::bouss {

using Eigen::Index;

LinearizationBlocks assemble_linearization(const Model& model, const Eigen::VectorXd& x) {
    const Index np = model.layout().n_psi();
    const Index nd = model.layout().dynamic_size();
    const SparseMatrix j = model.jacobian(x);
    LinearizationBlocks b;
    b.A11 = j.block(0, 0, np, np);
    b.A12 = j.block(0, np, np, nd);
    b.A21 = j.block(np, 0, nd, np);
    b.A22 = j.block(np, np, nd, nd);
    b.A11.makeCompressed();
    b.A12.makeCompressed();
    b.A21.makeCompressed();
    b.A22.makeCompressed();
    b.weights = model.dynamic_weights();
    b.steady_residual = model.residual(x).cwiseAbs().maxCoeff();
    return b;
}

struct SchurComplement::Impl {
    LinearizationBlocks blocks;
    Eigen::SparseLU<SparseMatrix> lu;
};

SchurComplement::SchurComplement(LinearizationBlocks blocks) {
    auto impl = std::make_shared<Impl>();
    impl->blocks = std::move(blocks);
    impl->lu.compute(impl->blocks.A11);
    if (impl->lu.info() != Eigen::Success) throw std::runtime_error("factorization of the Poisson block failed");
    impl_ = std::move(impl);
}

Index SchurComplement::size() const { return impl_->blocks.A22.rows(); }

const LinearizationBlocks& SchurComplement::blocks() const { return impl_->blocks; }

Eigen::VectorXd SchurComplement::stream(const Eigen::VectorXd& v) const {
    if (v.size() != size()) throw std::invalid_argument("dynamic vector has the wrong size");
    return impl_->lu.solve(-(impl_->blocks.A12 * v));
}

Eigen::VectorXd SchurComplement::apply(const Eigen::VectorXd& v) const {
    const auto& b = impl_->blocks;
    return b.A22 * v + b.A21 * stream(v);
}

eig::DiscreteOperator SchurComplement::as_operator() const {
    SchurComplement self = *this;
    return {size(), [self](const Eigen::VectorXd& v) { return self.apply(v); }};
}

Eigen::MatrixXd SchurComplement::dense() const {
    const auto& b = impl_->blocks;
    const Eigen::MatrixXd a12 = Eigen::MatrixXd(b.A12);
    const Eigen::MatrixXd psi = impl_->lu.solve(a12);
    Eigen::MatrixXd out = Eigen::MatrixXd(b.A22);
    out.noalias() -= b.A21 * psi;
    return out;
}

Index structural_zero_index(const eig::EigenSet& set) {
    if (set.size() == 0) throw std::invalid_argument("empty spectrum");
    Index best = 0;
    for (Index k = 1; k < set.size(); ++k)
        if (std::abs(set.values[k]) < std::abs(set.values[best])) best = k;
    return best;
}

StructuralZeroCheck check_structural_zero(const Model& model, const eig::EigenSet& set) {
    const Index k = structural_zero_index(set);
    if (k >= set.vector_count()) throw std::invalid_argument("eigenvector of the structural zero was not kept");
    StructuralZeroCheck c;
    c.eigenvalue_modulus = std::abs(set.values[k]);
    const auto& lay = model.layout();
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(lay.dynamic_size());
    e.segment(lay.S_offset() - lay.n_psi(), lay.n_S()).setOnes();
    e /= std::sqrt(eig::inner(e, e, set.weights).real());
    const Eigen::VectorXcd v = set.right.col(k);
    const eig::cplx proj = eig::inner(v, e, set.weights);
    const Eigen::VectorXcd diff = v - proj * e;
    c.direction_deviation = std::sqrt(eig::inner(diff, diff, set.weights).real());
    return c;
}

eig::EigenSet steady_spectrum(const Model& model, const Eigen::VectorXd& x, eig::EigOptions opt) {
    const SchurComplement schur(assemble_linearization(model, x));
    return eig::eig_dense(schur.dense(), model.dynamic_weights(), opt);
}

Eigen::MatrixXd lifted_noise_map(const Eigen::MatrixXd& a_dense, const Eigen::MatrixXd& noise_map, double q) {
    const Index n = a_dense.rows();
    if (noise_map.rows() != n) throw std::invalid_argument("noise map does not match the operator size");
    Eigen::MatrixXd shifted = -a_dense;
    shifted.diagonal().array() += q;
    return shifted.partialPivLu().solve(noise_map);
}

spectral::SpectralModel bouss_spectral_model(const Model& model, const Eigen::MatrixXd& a_dense,
                                             const eig::EigenSet& set, Index m, double q, double threshold) {
    const Index zero = structural_zero_index(set);
    std::vector<Index> keep;
    for (Index k = 0; k < set.vector_count() && static_cast<Index>(keep.size()) < m; ++k)
        if (k != zero) keep.push_back(k);
    if (static_cast<Index>(keep.size()) < m) throw std::invalid_argument("not enough eigenvectors were kept");

    eig::EigenSet sub;
    sub.values.resize(m);
    sub.left.resize(set.left.rows(), m);
    sub.right.resize(set.right.rows(), m);
    sub.weights = set.weights;
    std::vector<spectral::JordanBlock> blocks;
    for (Index k = 0; k < m; ++k) {
        sub.values[k] = set.values[keep[static_cast<std::size_t>(k)]];
        sub.left.col(k) = set.left.col(keep[static_cast<std::size_t>(k)]);
        sub.right.col(k) = set.right.col(keep[static_cast<std::size_t>(k)]);
        blocks.push_back({sub.values[k], 1});
    }
    const Eigen::MatrixXd lifted = lifted_noise_map(a_dense, model.surface_noise_map(), q);
    const Eigen::MatrixXcd g = eig::coupling_from_noise(sub, lifted, m);
    return spectral::SpectralModel(model.params().p, threshold, std::move(blocks), q, g);
}

}  // namespace ews::bouss
