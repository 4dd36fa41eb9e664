#pragma once

/// Discrete two-dimensional Boussinesq model in streamfunction-vorticity form.
///
/// Unknown vector layout: [psi (interior); omega (interior); T; S], where T
/// covers every node except the surface row when the surface temperature is
/// prescribed (kappa = infinity), and S covers every node. The last three
/// blocks form the dynamic state [omega; T; S].
///
/// T and S use vertex-centred finite volumes: diffusion is the conservative
/// three-point form with wall fluxes taken from the boundary conditions, and
/// advection is the divergence of face fluxes computed from corner values of
/// psi, so that the discrete flow is exactly divergence free and salt is
/// conserved up to the surface flux.

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ews/boussinesq/fd_ops.hpp"
#include "ews/boussinesq/grid.hpp"

namespace ews::bouss {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct BoussinesqParams {
    double Pr = 2.25;
    double Le = 1.0;
    double Ra = 1e4;
    double kappa = 100.0;  ///< infinity selects a prescribed surface temperature
    double L = 10.0;
    double H = 1.0;
    double nu = 0.0;
    double delta = 0.0;
    double p = 0.0;
    double sigma = 0.01;

    bool prescribed_surface_temperature() const { return kappa == std::numeric_limits<double>::infinity(); }
    void validate() const;

    /// Ra = 1e4, kappa = 100, L = 10, nu = delta = 0.
    static BoussinesqParams regime1();
    /// Ra = 4e4, kappa = infinity, L = 5, nu = -0.2, delta = 0.5.
    static BoussinesqParams regime2();
};

/// Full-grid fields, (M+2) x (N+2), rows indexed by the vertical node i.
struct StateFields {
    Eigen::MatrixXd psi, omega, T, S;
};

class Layout {
public:
    Layout() = default;
    Layout(int M, int N, bool prescribed_top_temperature);

    /// Global indices into the unknown vector, or -1 where the value is fixed.
    Eigen::Index psi(int i, int j) const;
    Eigen::Index omega(int i, int j) const;
    Eigen::Index T(int i, int j) const;
    Eigen::Index S(int i, int j) const;

    Eigen::Index n_psi() const { return n_psi_; }
    Eigen::Index n_omega() const { return n_psi_; }
    Eigen::Index n_T() const { return n_T_; }
    Eigen::Index n_S() const { return n_S_; }
    Eigen::Index omega_offset() const { return n_psi_; }
    Eigen::Index T_offset() const { return 2 * n_psi_; }
    Eigen::Index S_offset() const { return 2 * n_psi_ + n_T_; }
    Eigen::Index total() const { return 2 * n_psi_ + n_T_ + n_S_; }
    Eigen::Index dynamic_size() const { return n_psi_ + n_T_ + n_S_; }
    int top_T_row() const { return top_T_row_; }

private:
    int M_ = 0, N_ = 0;
    int top_T_row_ = 0;
    Eigen::Index n_psi_ = 0, n_T_ = 0, n_S_ = 0;
};

class Model {
public:
    Model(const Grid2D& grid, const BoussinesqParams& params);

    const Grid2D& grid() const { return grid_; }
    const BoussinesqParams& params() const { return params_; }
    const Layout& layout() const { return layout_; }
    const FdOps& ops() const { return ops_; }

    Eigen::VectorXd pack(const StateFields& s) const;
    /// Fills wall and prescribed values.
    StateFields unpack(const Eigen::VectorXd& x) const;
    /// Zero flow, T equal to the surface reference profile, S = 0.
    Eigen::VectorXd rest_state() const;

    /// Steady-state residual at the model's p.
    Eigen::VectorXd residual(const Eigen::VectorXd& x) const { return residual(x, params_.p); }
    Eigen::VectorXd residual(const Eigen::VectorXd& x, double p) const;
    /// Exact derivative of the residual with respect to the unknowns.
    SparseMatrix jacobian(const Eigen::VectorXd& x) const;
    /// Derivative of the residual with respect to p.
    const Eigen::VectorXd& residual_p_derivative() const { return const_p_; }

    /// Cell areas of the dynamic unknowns [omega; T; S].
    Eigen::VectorXd dynamic_weights() const;
    /// Cell areas of the S unknowns, in S order.
    Eigen::VectorXd salinity_weights() const;
    /// Diffusion coefficient of the surface salt-flux noise on the dynamic
    /// unknowns, one column per surface node.
    Eigen::MatrixXd surface_noise_map() const;
    /// Row index of the S equation replaced by the integral constraint.
    Eigen::Index pinned_row() const { return layout_.S_offset() + layout_.n_S() - 1; }

    /// Largest streamfunction value over the grid.
    double max_psi(const Eigen::VectorXd& x) const;

private:
    struct NodeRef {
        Eigen::Index idx = -1;
        double fixed = 0.0;
    };
    struct FaceTerm {
        Eigen::Index row;
        double factor;  ///< +-1 / cell area
        std::uint32_t psi_begin, psi_end;
        NodeRef a, b;
    };

    void build_linear();
    void build_advection();
    void add_field_advection(int field);
    double value(const NodeRef& r, const Eigen::VectorXd& x) const { return r.idx < 0 ? r.fixed : x[r.idx]; }
    double surface_temperature(int j) const;

    Grid2D grid_;
    BoussinesqParams params_;
    Layout layout_;
    FdOps ops_;
    SparseMatrix linear_;
    Eigen::VectorXd const_base_;
    Eigen::VectorXd const_p_;
    std::vector<FaceTerm> faces_;
    std::vector<Eigen::Index> psi_idx_;
    std::vector<double> psi_coef_;
};

/// Reflection x2 -> L - x2 with psi, omega odd and T, S even.
StateFields mirror_solution(const StateFields& s, const BoussinesqParams& params);

}  // namespace ews::bouss
