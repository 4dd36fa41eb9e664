#include "ews/boussinesq/fd_ops.hpp"

namespace ews::bouss {

ThreePoint first_derivative_weights(double hm, double hp) {
    return {-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))};
}

ThreePoint second_derivative_weights(double hm, double hp) {
    return {2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))};
}

FdOps::FdOps(const Grid2D& grid) : M_(grid.M), N_(grid.N) {
    d1_x1_.resize(static_cast<std::size_t>(grid.M) + 2);
    d2_x1_.resize(static_cast<std::size_t>(grid.M) + 2);
    for (int i = 1; i <= grid.M; ++i) {
        d1_x1_[static_cast<std::size_t>(i)] = first_derivative_weights(grid.h1(i - 1), grid.h1(i));
        d2_x1_[static_cast<std::size_t>(i)] = second_derivative_weights(grid.h1(i - 1), grid.h1(i));
    }
    d1_x2_ = first_derivative_weights(grid.dx2, grid.dx2);
    d2_x2_ = second_derivative_weights(grid.dx2, grid.dx2);
}

Eigen::MatrixXd FdOps::dx1(const Eigen::MatrixXd& f) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(f.rows(), f.cols());
    for (int i = 1; i <= M_; ++i) {
        const auto& w = d1_x1(i);
        for (int j = 1; j <= N_; ++j) out(i, j) = w.minus * f(i - 1, j) + w.centre * f(i, j) + w.plus * f(i + 1, j);
    }
    return out;
}

Eigen::MatrixXd FdOps::dx2(const Eigen::MatrixXd& f) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(f.rows(), f.cols());
    const auto& w = d1_x2_;
    for (int i = 1; i <= M_; ++i)
        for (int j = 1; j <= N_; ++j) out(i, j) = w.minus * f(i, j - 1) + w.centre * f(i, j) + w.plus * f(i, j + 1);
    return out;
}

Eigen::MatrixXd FdOps::laplacian(const Eigen::MatrixXd& f) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(f.rows(), f.cols());
    const auto& w2 = d2_x2_;
    for (int i = 1; i <= M_; ++i) {
        const auto& w1 = d2_x1(i);
        for (int j = 1; j <= N_; ++j)
            out(i, j) = w1.minus * f(i - 1, j) + w1.centre * f(i, j) + w1.plus * f(i + 1, j) +
                        w2.minus * f(i, j - 1) + w2.centre * f(i, j) + w2.plus * f(i, j + 1);
    }
    return out;
}

FdOps nonuniform_fd_ops(const Grid2D& grid) { return FdOps(grid); }

}  // namespace ews::bouss
