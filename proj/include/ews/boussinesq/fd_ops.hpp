#pragma once

/// Three-point finite-difference stencils on the stretched grid.

#include <Eigen/Dense>

#include "ews/boussinesq/grid.hpp"

namespace ews::bouss {

struct ThreePoint {
    double minus = 0.0;
    double centre = 0.0;
    double plus = 0.0;
};

/// Weights for f'(x0) from f(x0 - hm), f(x0), f(x0 + hp); exact on quadratics.
ThreePoint first_derivative_weights(double hm, double hp);
/// Weights for f''(x0); exact on quadratics.
ThreePoint second_derivative_weights(double hm, double hp);

/// Stencils at every interior node of a grid.
class FdOps {
public:
    explicit FdOps(const Grid2D& grid);

    const ThreePoint& d1_x1(int i) const { return d1_x1_[static_cast<std::size_t>(i)]; }
    const ThreePoint& d2_x1(int i) const { return d2_x1_[static_cast<std::size_t>(i)]; }
    const ThreePoint& d1_x2() const { return d1_x2_; }
    const ThreePoint& d2_x2() const { return d2_x2_; }

    /// Derivatives of a full-grid field (rows i, columns j) at interior nodes;
    /// wall entries of the result are left at zero.
    Eigen::MatrixXd dx1(const Eigen::MatrixXd& f) const;
    Eigen::MatrixXd dx2(const Eigen::MatrixXd& f) const;
    Eigen::MatrixXd laplacian(const Eigen::MatrixXd& f) const;

private:
    int M_ = 0;
    int N_ = 0;
    std::vector<ThreePoint> d1_x1_, d2_x1_;
    ThreePoint d1_x2_, d2_x2_;
};

FdOps nonuniform_fd_ops(const Grid2D& grid);

}  // namespace ews::bouss
