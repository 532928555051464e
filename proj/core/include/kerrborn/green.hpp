#ifndef KERRBORN_GREEN_HPP
#define KERRBORN_GREEN_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>

#include "kerrborn/grid.hpp"

namespace kerrborn {

/// Boundary point source: `location` is an endpoint (0/1) on the interval or
/// an angle on the disk; Neumann data is a discrete delta at the matching
/// boundary node with total boundary integral `scale`.
struct Source {
    double location = 0.0;
    double scale = 1.0;
    double k = 1.0;
};

/// Background field u0 for one source, with its boundary trace.
struct BackgroundField {
    Eigen::VectorXd u;                // on all nodes
    Eigen::VectorXd boundary_trace;   // u at grid.boundary, in boundary order
    Source source;
};

/// Factorized background Helmholtz operator (Delta + k^2) with homogeneous
/// Neumann boundary condition, in the quadrature-weighted (symmetric) form
/// S = W (Delta_h + k^2 I). Immutable after construction; solve calls are
/// const and safe to run concurrently.
class GreenSolver {
public:
    GreenSolver(const Grid& grid, double k);
    ~GreenSolver();
    GreenSolver(GreenSolver&&) noexcept;
    GreenSolver& operator=(GreenSolver&&) noexcept;
    GreenSolver(const GreenSolver&) = delete;
    GreenSolver& operator=(const GreenSolver&) = delete;

    const Grid& grid() const { return *grid_; }
    double k() const { return k_; }

    /// G(v) = -k^2 \int G(x,y) v(y) dy, i.e. the solution w of
    /// (Delta + k^2) w = -k^2 v with homogeneous Neumann data.
    Eigen::VectorXd apply_green(const Eigen::VectorXd& v) const;

    /// Solves S x = rhs (weighted residual form).
    Eigen::VectorXd solve_weighted(const Eigen::VectorXd& rhs) const;

    /// Applies S = W (Delta_h + k^2 I) to a node function.
    Eigen::VectorXd apply_operator(const Eigen::VectorXd& u) const;

    /// Column j of the discrete Green function, G(., y_j).
    Eigen::VectorXd green_column(int node) const;

    const Eigen::SparseMatrix<double>& weighted_operator() const;

private:
    std::shared_ptr<const Grid> grid_;
    double k_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Solves the background problem (Delta + k^2) u0 = 0, du0/dnu = g for a
/// boundary point source. Throws ResonanceError near a Neumann eigenwavenumber.
BackgroundField solve_background(const GreenSolver& solver, const Source& source);
BackgroundField solve_background(const Grid& grid, double k, const Source& source);

/// mu = k^2 sup_x \int |G(x,y)| dy, evaluated over grid nodes. For large grids
/// the sup is taken over an evenly strided subsample of nodes; the subsample
/// size is reported through `rows_used` when non-null.
double estimate_mu(const GreenSolver& solver, int* rows_used = nullptr);

}  // namespace kerrborn

#endif
