#include "ews/boussinesq/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ews::bouss {

using Eigen::Index;

void BoussinesqParams::validate() const {
    if (!(Pr > 0.0) || !(Le > 0.0) || !(Ra > 0.0) || !(L > 0.0) || !(H > 0.0))
        throw std::invalid_argument("Pr, Le, Ra, L and H must be positive");
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive or infinity");
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
    if (!std::isfinite(nu) || !std::isfinite(delta) || !std::isfinite(p))
        throw std::invalid_argument("nu, delta and p must be finite");
}

BoussinesqParams BoussinesqParams::regime1() {
    BoussinesqParams b;
    b.Ra = 1e4;
    b.kappa = 100.0;
    b.L = 10.0;
    b.nu = 0.0;
    b.delta = 0.0;
    return b;
}

BoussinesqParams BoussinesqParams::regime2() {
    BoussinesqParams b;
    b.Ra = 4e4;
    b.kappa = std::numeric_limits<double>::infinity();
    b.L = 5.0;
    b.nu = -0.2;
    b.delta = 0.5;
    return b;
}

Layout::Layout(int M, int N, bool prescribed_top_temperature)
    : M_(M), N_(N), top_T_row_(prescribed_top_temperature ? M : M + 1) {
    n_psi_ = static_cast<Index>(M) * N;
    n_T_ = static_cast<Index>(top_T_row_ + 1) * (N + 2);
    n_S_ = static_cast<Index>(M + 2) * (N + 2);
}

Index Layout::psi(int i, int j) const {
    if (i < 1 || i > M_ || j < 1 || j > N_) return -1;
    return static_cast<Index>(i - 1) * N_ + (j - 1);
}

Index Layout::omega(int i, int j) const {
    const Index k = psi(i, j);
    return k < 0 ? -1 : k + n_psi_;
}

Index Layout::T(int i, int j) const {
    if (i < 0 || i > top_T_row_ || j < 0 || j > N_ + 1) return -1;
    return T_offset() + static_cast<Index>(i) * (N_ + 2) + j;
}

Index Layout::S(int i, int j) const {
    if (i < 0 || i > M_ + 1 || j < 0 || j > N_ + 1) return -1;
    return S_offset() + static_cast<Index>(i) * (N_ + 2) + j;
}

Model::Model(const Grid2D& grid, const BoussinesqParams& params)
    : grid_(grid), params_(params), layout_(grid.M, grid.N, params.prescribed_surface_temperature()), ops_(grid) {
    params_.validate();
    if (std::abs(grid.L - params.L) > 1e-12 * params.L)
        throw std::invalid_argument("grid length does not match the basin length");
    build_linear();
    build_advection();
}

double Model::surface_temperature(int j) const {
    return forcing_profiles(grid_.x[static_cast<std::size_t>(j)], grid_.L).TS - params_.delta;
}

void Model::build_linear() {
    const int M = grid_.M, N = grid_.N;
    const auto& P = params_;
    const Index n = layout_.total();
    const_base_ = Eigen::VectorXd::Zero(n);
    const_p_ = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 8);

    // Interior psi and omega rows: three-point Laplacian with zero wall values.
    const ThreePoint& dxx = ops_.d2_x2();
    const ThreePoint& dx = ops_.d1_x2();
    for (int i = 1; i <= M; ++i) {
        const ThreePoint& dzz = ops_.d2_x1(i);
        for (int j = 1; j <= N; ++j) {
            const Index rp = layout_.psi(i, j);
            const Index ro = layout_.omega(i, j);
            auto lap = [&](Index row, double scale, auto idx) {
                const Index c = idx(i, j);
                trip.emplace_back(row, c, scale * (dzz.centre + dxx.centre));
                if (Index k = idx(i - 1, j); k >= 0) trip.emplace_back(row, k, scale * dzz.minus);
                if (Index k = idx(i + 1, j); k >= 0) trip.emplace_back(row, k, scale * dzz.plus);
                if (Index k = idx(i, j - 1); k >= 0) trip.emplace_back(row, k, scale * dxx.minus);
                if (Index k = idx(i, j + 1); k >= 0) trip.emplace_back(row, k, scale * dxx.plus);
            };
            lap(rp, 1.0, [&](int a, int b) { return layout_.psi(a, b); });
            trip.emplace_back(rp, ro, 1.0);
            lap(ro, P.Pr, [&](int a, int b) { return layout_.omega(a, b); });
            const double c = P.Pr * P.Ra;
            trip.emplace_back(ro, layout_.T(i, j - 1), c * dx.minus);
            trip.emplace_back(ro, layout_.T(i, j + 1), c * dx.plus);
            trip.emplace_back(ro, layout_.S(i, j - 1), -c * dx.minus);
            trip.emplace_back(ro, layout_.S(i, j + 1), -c * dx.plus);
        }
    }

    // Finite-volume diffusion for T and S.
    auto diffusion = [&](auto idx, int top_row, double scale, bool is_T) {
        for (int i = 0; i <= top_row; ++i) {
            for (int j = 0; j <= N + 1; ++j) {
                const Index row = idx(i, j);
                const double w1 = grid_.w1[static_cast<std::size_t>(i)];
                const double w2 = grid_.w2[static_cast<std::size_t>(j)];
                auto face = [&](int ni, int nj, double coeff) {
                    const Index k = idx(ni, nj);
                    trip.emplace_back(row, row, -scale * coeff);
                    if (k >= 0) {
                        trip.emplace_back(row, k, scale * coeff);
                    } else {
                        const_base_[row] += scale * coeff * surface_temperature(nj);
                    }
                };
                if (i > 0) face(i - 1, j, 1.0 / (grid_.h1(i - 1) * w1));
                if (i < M + 1) face(i + 1, j, 1.0 / (grid_.h1(i) * w1));
                if (j > 0) face(i, j - 1, 1.0 / (grid_.dx2 * w2));
                if (j < N + 1) face(i, j + 1, 1.0 / (grid_.dx2 * w2));
                if (i == M + 1) {
                    const double x2 = grid_.x[static_cast<std::size_t>(j)];
                    if (is_T) {
                        trip.emplace_back(row, row, -scale * P.kappa / w1);
                        const_base_[row] += scale * P.kappa * surface_temperature(j) / w1;
                    } else {
                        const auto f = forcing_profiles(x2, grid_.L);
                        const_p_[row] += scale * (f.QS + P.nu * f.VS) / w1;
                    }
                }
            }
        }
    };
    diffusion([&](int a, int b) { return layout_.T(a, b); }, layout_.top_T_row(), 1.0, true);
    diffusion([&](int a, int b) { return layout_.S(a, b); }, M + 1, 1.0 / P.Le, false);

    linear_.resize(n, n);
    linear_.setFromTriplets(trip.begin(), trip.end());
}

void Model::build_advection() {
    faces_.clear();
    psi_idx_.clear();
    psi_coef_.clear();
    for (int field = 0; field < 3; ++field) add_field_advection(field);
}

/// Cell edges in x1 and x2 are labelled by half-indices: edge e in 0..M sits
/// between nodes e and e+1, while -1 and M+1 denote the walls. Corner psi is
/// the mean of the four surrounding nodes and vanishes on walls.
void Model::add_field_advection(int field) {
    const int M = grid_.M, N = grid_.N;
    auto idx = [&](int i, int j) -> Index {
        switch (field) {
            case 0: return layout_.omega(i, j);
            case 1: return layout_.T(i, j);
            default: return layout_.S(i, j);
        }
    };
    auto node = [&](int i, int j) {
        NodeRef r;
        r.idx = idx(i, j);
        if (r.idx < 0 && field == 1 && i == M + 1) r.fixed = surface_temperature(j);
        return r;
    };
    auto push_corner = [&](int a, int b, double sign) {
        if (a < 0 || a > M || b < 0 || b > N) return;
        for (int di = 0; di <= 1; ++di)
            for (int dj = 0; dj <= 1; ++dj)
                if (Index k = layout_.psi(a + di, b + dj); k >= 0) {
                    psi_idx_.push_back(k);
                    psi_coef_.push_back(0.25 * sign);
                }
    };
    const int top = field == 0 ? M : (field == 1 ? layout_.top_T_row() : M + 1);
    const int lo = field == 0 ? 1 : 0;
    const int jlo = field == 0 ? 1 : 0;
    const int jhi = field == 0 ? N : N + 1;
    for (int i = lo; i <= top; ++i) {
        const int e1lo = i == 0 ? -1 : i - 1;
        const int e1hi = i == M + 1 ? M + 1 : i;
        for (int j = jlo; j <= jhi; ++j) {
            const int e2lo = j == 0 ? -1 : j - 1;
            const int e2hi = j == N + 1 ? N + 1 : j;
            const Index row = idx(i, j);
            const double inv_area = 1.0 / grid_.cell_area(i, j);
            auto add = [&](double sign, auto corners, NodeRef other) {
                FaceTerm f;
                f.row = row;
                f.factor = sign * inv_area;
                f.psi_begin = static_cast<std::uint32_t>(psi_idx_.size());
                corners();
                f.psi_end = static_cast<std::uint32_t>(psi_idx_.size());
                f.a = node(i, j);
                f.b = other;
                if (f.psi_end > f.psi_begin) faces_.push_back(f);
            };
            // x2 faces: flux psi(e1hi) - psi(e1lo) along the face column.
            if (j < N + 1)
                add(1.0, [&] { push_corner(e1hi, j, 1.0); push_corner(e1lo, j, -1.0); }, node(i, j + 1));
            if (j > 0)
                add(-1.0, [&] { push_corner(e1hi, j - 1, 1.0); push_corner(e1lo, j - 1, -1.0); }, node(i, j - 1));
            // x1 faces: flux -(psi(e2hi) - psi(e2lo)) along the face row.
            if (i < M + 1)
                add(1.0, [&] { push_corner(i, e2hi, -1.0); push_corner(i, e2lo, 1.0); }, node(i + 1, j));
            if (i > 0)
                add(-1.0, [&] { push_corner(i - 1, e2hi, -1.0); push_corner(i - 1, e2lo, 1.0); }, node(i - 1, j));
        }
    }
}

Eigen::VectorXd Model::residual(const Eigen::VectorXd& x, double p) const {
    if (x.size() != layout_.total()) throw std::invalid_argument("state vector has the wrong size");
    if (!x.allFinite()) throw std::domain_error("state contains non-finite values");
    Eigen::VectorXd f = linear_ * x + const_base_ + p * const_p_;
    for (const auto& face : faces_) {
        double flux = 0.0;
        for (auto k = face.psi_begin; k < face.psi_end; ++k) flux += psi_coef_[k] * x[psi_idx_[k]];
        f[face.row] -= face.factor * flux * 0.5 * (value(face.a, x) + value(face.b, x));
    }
    return f;
}

SparseMatrix Model::jacobian(const Eigen::VectorXd& x) const {
    if (x.size() != layout_.total()) throw std::invalid_argument("state vector has the wrong size");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(linear_.nonZeros()) + psi_idx_.size() + 2 * faces_.size());
    for (Index c = 0; c < linear_.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(linear_, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (const auto& face : faces_) {
        double flux = 0.0;
        for (auto k = face.psi_begin; k < face.psi_end; ++k) flux += psi_coef_[k] * x[psi_idx_[k]];
        const double avg = 0.5 * (value(face.a, x) + value(face.b, x));
        for (auto k = face.psi_begin; k < face.psi_end; ++k)
            trip.emplace_back(face.row, psi_idx_[k], -face.factor * psi_coef_[k] * avg);
        if (face.a.idx >= 0) trip.emplace_back(face.row, face.a.idx, -face.factor * flux * 0.5);
        if (face.b.idx >= 0) trip.emplace_back(face.row, face.b.idx, -face.factor * flux * 0.5);
    }
    SparseMatrix J(layout_.total(), layout_.total());
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
}

Eigen::VectorXd Model::pack(const StateFields& s) const {
    const int M = grid_.M, N = grid_.N;
    auto check = [&](const Eigen::MatrixXd& m) {
        if (m.rows() != M + 2 || m.cols() != N + 2) throw std::invalid_argument("field has the wrong shape");
    };
    check(s.psi);
    check(s.omega);
    check(s.T);
    check(s.S);
    Eigen::VectorXd x(layout_.total());
    for (int i = 0; i <= M + 1; ++i)
        for (int j = 0; j <= N + 1; ++j) {
            if (Index k = layout_.psi(i, j); k >= 0) x[k] = s.psi(i, j);
            if (Index k = layout_.omega(i, j); k >= 0) x[k] = s.omega(i, j);
            if (Index k = layout_.T(i, j); k >= 0) x[k] = s.T(i, j);
            x[layout_.S(i, j)] = s.S(i, j);
        }
    return x;
}

StateFields Model::unpack(const Eigen::VectorXd& x) const {
    if (x.size() != layout_.total()) throw std::invalid_argument("state vector has the wrong size");
    const int M = grid_.M, N = grid_.N;
    StateFields s;
    s.psi = Eigen::MatrixXd::Zero(M + 2, N + 2);
    s.omega = Eigen::MatrixXd::Zero(M + 2, N + 2);
    s.T = Eigen::MatrixXd::Zero(M + 2, N + 2);
    s.S = Eigen::MatrixXd::Zero(M + 2, N + 2);
    for (int i = 0; i <= M + 1; ++i)
        for (int j = 0; j <= N + 1; ++j) {
            if (Index k = layout_.psi(i, j); k >= 0) s.psi(i, j) = x[k];
            if (Index k = layout_.omega(i, j); k >= 0) s.omega(i, j) = x[k];
            const Index kt = layout_.T(i, j);
            s.T(i, j) = kt >= 0 ? x[kt] : surface_temperature(j);
            s.S(i, j) = x[layout_.S(i, j)];
        }
    return s;
}

Eigen::VectorXd Model::rest_state() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(layout_.total());
    for (int i = 0; i <= layout_.top_T_row(); ++i)
        for (int j = 0; j <= grid_.N + 1; ++j) x[layout_.T(i, j)] = surface_temperature(j);
    return x;
}

Eigen::VectorXd Model::dynamic_weights() const {
    const int M = grid_.M, N = grid_.N;
    const Index off = layout_.n_psi();
    Eigen::VectorXd w(layout_.dynamic_size());
    for (int i = 0; i <= M + 1; ++i)
        for (int j = 0; j <= N + 1; ++j) {
            const double a = grid_.cell_area(i, j);
            if (Index k = layout_.omega(i, j); k >= 0) w[k - off] = a;
            if (Index k = layout_.T(i, j); k >= 0) w[k - off] = a;
            w[layout_.S(i, j) - off] = a;
        }
    return w;
}

Eigen::VectorXd Model::salinity_weights() const {
    Eigen::VectorXd w(layout_.n_S());
    for (int i = 0; i <= grid_.M + 1; ++i)
        for (int j = 0; j <= grid_.N + 1; ++j) w[layout_.S(i, j) - layout_.S_offset()] = grid_.cell_area(i, j);
    return w;
}

Eigen::MatrixXd Model::surface_noise_map() const {
    const int M = grid_.M, N = grid_.N;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(layout_.dynamic_size(), N + 2);
    const double w1 = grid_.w1[static_cast<std::size_t>(M) + 1];
    for (int j = 0; j <= N + 1; ++j) {
        const double qs = forcing_profiles(grid_.x[static_cast<std::size_t>(j)], grid_.L).QS;
        b(layout_.S(M + 1, j) - layout_.n_psi(), j) =
            params_.sigma * qs / (params_.Le * w1 * std::sqrt(grid_.w2[static_cast<std::size_t>(j)]));
    }
    return b;
}

double Model::max_psi(const Eigen::VectorXd& x) const {
    return x.head(layout_.n_psi()).maxCoeff();
}

StateFields mirror_solution(const StateFields& s, const BoussinesqParams& params) {
    if (params.nu != 0.0) throw std::invalid_argument("mirror construction requires nu = 0");
    StateFields m;
    m.psi = -s.psi.rowwise().reverse();
    m.omega = -s.omega.rowwise().reverse();
    m.T = s.T.rowwise().reverse();
    m.S = s.S.rowwise().reverse();
    return m;
}

}  // namespace ews::bouss
