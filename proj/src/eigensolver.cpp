#include "ews/eigensolver.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <lapacke.h>

namespace ews::eig {

Eigen::MatrixXd densify(const DiscreteOperator& op, Eigen::Index cap) {
    if (op.n > cap) throw std::length_error("operator dimension exceeds the dense cap");
    Eigen::MatrixXd out(op.n, op.n);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(op.n);
    for (Eigen::Index j = 0; j < op.n; ++j) {
        e[j] = 1.0;
        out.col(j) = op.apply(e);
        e[j] = 0.0;
    }
    return out;
}

cplx inner(const Eigen::Ref<const Eigen::VectorXcd>& a, const Eigen::Ref<const Eigen::VectorXcd>& b,
           const Eigen::VectorXd& weights) {
    cplx acc{0.0, 0.0};
    for (Eigen::Index k = 0; k < a.size(); ++k) acc += weights[k] * a[k] * std::conj(b[k]);
    return acc;
}

namespace {

struct RawEig {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd right;
    Eigen::MatrixXcd left_euclid;  ///< y with y^H A = lambda y^H
};

Eigen::MatrixXcd unpack_real_pairs(const Eigen::MatrixXd& v, const Eigen::VectorXd& wi) {
    const Eigen::Index n = v.rows();
    Eigen::MatrixXcd out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (wi[j] == 0.0) {
            out.col(j) = v.col(j).cast<cplx>();
        } else {
            out.col(j).real() = v.col(j);
            out.col(j).imag() = v.col(j + 1);
            out.col(j + 1) = out.col(j).conjugate();
            ++j;
        }
    }
    return out;
}

RawEig lapack_eig(const Eigen::MatrixXd& a, bool vectors) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd work = a;
    Eigen::VectorXd wr(n), wi(n);
    Eigen::MatrixXd vl, vr;
    if (vectors) {
        vl.resize(n, n);
        vr.resize(n, n);
    }
    const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', vectors ? 'V' : 'N',
                                          static_cast<lapack_int>(n), work.data(), static_cast<lapack_int>(n),
                                          wr.data(), wi.data(), vectors ? vl.data() : nullptr,
                                          static_cast<lapack_int>(n), vectors ? vr.data() : nullptr,
                                          static_cast<lapack_int>(n));
    if (info > 0) throw std::runtime_error("QR iteration failed to converge");
    if (info < 0) throw std::invalid_argument("invalid argument passed to the eigensolver");
    RawEig out;
    out.values.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) out.values[k] = {wr[k], wi[k]};
    if (vectors) {
        out.right = unpack_real_pairs(vr, wi);
        out.left_euclid = unpack_real_pairs(vl, wi);
    }
    return out;
}

RawEig eigen_eig(const Eigen::MatrixXd& a, bool vectors) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, vectors);
    if (es.info() != Eigen::Success) throw std::runtime_error("QR iteration failed to converge");
    RawEig out;
    out.values = es.eigenvalues();
    if (vectors) {
        out.right = es.eigenvectors();
        // rows of V^{-1} are the left eigenvectors, already biorthogonal to V
        out.left_euclid = out.right.inverse().adjoint();
    }
    return out;
}

std::vector<Eigen::Index> sort_order(const Eigen::VectorXcd& values) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (values[a].real() != values[b].real()) return values[a].real() > values[b].real();
        return values[a].imag() < values[b].imag();
    });
    return idx;
}

}  // namespace

EigenSet eig_dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& weights, EigOptions opt) {
    if (a.rows() != a.cols()) throw std::invalid_argument("matrix must be square");
    if (weights.size() != a.rows()) throw std::invalid_argument("weight vector has the wrong size");
    if (!a.allFinite()) throw std::invalid_argument("matrix has non-finite entries");
    if ((weights.array() <= 0.0).any()) throw std::invalid_argument("weights must be positive");

    const RawEig raw = opt.backend == Backend::Lapack ? lapack_eig(a, opt.vectors) : eigen_eig(a, opt.vectors);
    const auto order = sort_order(raw.values);
    const Eigen::Index n = a.rows();

    EigenSet set;
    set.weights = weights;
    set.values.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) set.values[k] = raw.values[order[static_cast<std::size_t>(k)]];
    if (!opt.vectors) return set;

    const Eigen::Index kept = (opt.keep_vectors <= 0 || opt.keep_vectors > n) ? n : opt.keep_vectors;
    set.right.resize(n, kept);
    set.left.resize(n, kept);
    set.residuals.resize(kept);
    const Eigen::VectorXd inv_w = weights.cwiseInverse();
    for (Eigen::Index k = 0; k < kept; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        Eigen::VectorXcd v = raw.right.col(src);
        v /= std::sqrt(inner(v, v, weights).real());
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        v *= std::conj(v[imax]) / std::abs(v[imax]);
        v[imax] = std::abs(v[imax]);

        // W-adjoint eigenvector: l = W^{-1} y, scaled so that <l, v>_W = v^H y = 1
        Eigen::VectorXcd l = inv_w.cwiseProduct(raw.left_euclid.col(src));
        const cplx pairing = inner(l, v, weights);
        if (std::abs(pairing) < std::numeric_limits<double>::min())
            throw std::runtime_error("left and right eigenvectors are orthogonal (defective eigenvalue)");
        l /= pairing;

        set.right.col(k) = v;
        set.left.col(k) = l;
        set.residuals[k] = (a * v - set.values[k] * v).norm() / v.norm();
    }
    return set;
}

EigenSet leading_eigs(const EigenSet& set, Eigen::Index m) {
    if (m < 0 || m > set.size()) throw std::out_of_range("requested more eigenvalues than available");
    EigenSet out;
    out.weights = set.weights;
    out.values = set.values.head(m);
    const Eigen::Index kv = std::min(m, set.vector_count());
    if (kv > 0) {
        out.right = set.right.leftCols(kv);
        out.left = set.left.leftCols(kv);
        out.residuals = set.residuals.head(kv);
    }
    return out;
}

TrackedSpectrum track_branch_eigs(const std::vector<double>& p, const std::vector<Eigen::VectorXcd>& spectra,
                                  Eigen::Index m) {
    if (p.empty() || p.size() != spectra.size()) throw std::invalid_argument("branch is empty or inconsistent");
    TrackedSpectrum out;
    out.p = p;
    out.values.resize(static_cast<Eigen::Index>(p.size()), m);
    out.ambiguous.assign(p.size(), false);
    for (const auto& s : spectra)
        if (s.size() < m) throw std::out_of_range("spectrum shorter than the tracked count");
    out.values.row(0) = spectra[0].head(m).transpose();
    for (std::size_t step = 1; step < p.size(); ++step) {
        // candidates: a window of the next spectrum large enough to contain every continuation
        const Eigen::Index window = std::min<Eigen::Index>(spectra[step].size(), 2 * m + 4);
        std::vector<bool> used(static_cast<std::size_t>(window), false);
        for (Eigen::Index lab = 0; lab < m; ++lab) {
            const cplx prev = out.values(static_cast<Eigen::Index>(step) - 1, lab);
            double best = std::numeric_limits<double>::infinity(), second = best;
            Eigen::Index best_k = -1;
            for (Eigen::Index k = 0; k < window; ++k) {
                if (used[static_cast<std::size_t>(k)]) continue;
                const double d = std::abs(spectra[step][k] - prev);
                if (d < best) {
                    second = best;
                    best = d;
                    best_k = k;
                } else if (d < second) {
                    second = d;
                }
            }
            if (second - best < 1e-10) out.ambiguous[step] = true;
            used[static_cast<std::size_t>(best_k)] = true;
            out.values(static_cast<Eigen::Index>(step), lab) = spectra[step][best_k];
        }
    }
    return out;
}

Eigen::MatrixXcd coupling_from_noise(const EigenSet& set, const Eigen::MatrixXd& noise_map, Eigen::Index m) {
    if (m > set.vector_count()) throw std::out_of_range("left vectors not available for the requested count");
    if (noise_map.rows() != set.weights.size()) throw std::invalid_argument("noise map has the wrong length");
    Eigen::MatrixXcd proj(m, noise_map.cols());
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index c = 0; c < noise_map.cols(); ++c)
            proj(i, c) = inner(set.left.col(i), noise_map.col(c).cast<cplx>(), set.weights);
    return proj * proj.adjoint();
}

}  // namespace ews::eig
