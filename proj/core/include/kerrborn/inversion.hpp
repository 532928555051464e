#ifndef KERRBORN_INVERSION_HPP
#define KERRBORN_INVERSION_HPP

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <vector>

#include "kerrborn/forward.hpp"
#include "kerrborn/green.hpp"
#include "kerrborn/grid.hpp"
#include "kerrborn/susceptibility.hpp"

namespace kerrborn {

/// Grid + sources + per-frequency factorizations + background fields, shared
/// by K1 assembly, inverse-series evaluation and data synthesis. Immutable
/// after construction.
class ForwardContext {
public:
    ForwardContext(Grid grid, std::vector<Source> sources);

    const Grid& grid() const { return grid_; }
    const std::vector<Source>& sources() const { return sources_; }
    int num_sources() const { return static_cast<int>(sources_.size()); }
    int num_receivers() const { return static_cast<int>(grid_.boundary.size()); }
    const GreenSolver& solver(int source_index) const { return *per_source_[source_index]; }
    const BackgroundField& field(int source_index) const { return fields_[source_index]; }
    const GreenSolver& solver_for_k(double k) const;

private:
    Grid grid_;
    std::vector<Source> sources_;
    std::map<double, std::shared_ptr<GreenSolver>> solvers_;
    std::vector<std::shared_ptr<GreenSolver>> per_source_;
    std::vector<BackgroundField> fields_;
};

/// phi(source, receiver) = (u - u0) at the receiver boundary nodes.
struct ScatteringData {
    Eigen::MatrixXd phi;  // num_sources x num_receivers
    std::vector<Source> sources;

    /// Uniform-weight l2 norm over (source, receiver).
    double data_norm() const;
    /// Stacks rows source-major into one data vector.
    Eigen::VectorXd stacked() const;
};

/// Which medium coefficients are unknown, and on which cells.
struct UnknownLayout {
    bool solve_alpha = true;
    bool solve_beta = true;
    std::vector<int> cells;  // node indices of unknown cells

    static UnknownLayout all_interior(const Grid& grid, bool alpha = true, bool beta = true);
    int num_columns() const {
        return (static_cast<int>(solve_alpha) + static_cast<int>(solve_beta)) *
               static_cast<int>(cells.size());
    }
    /// Expands a coefficient vector (alpha block then beta block) to a full
    /// node-function susceptibility, zero elsewhere.
    Susceptibility embed(const Grid& grid, const Eigen::VectorXd& coeffs) const;
    /// Restricts a susceptibility to the unknown coefficient vector.
    Eigen::VectorXd extract(const Susceptibility& zeta) const;
};

/// The linearized forward map K_1 as a matrix: row (source s, receiver r),
/// columns ordered [alpha cells | beta cells]. Column j of the alpha block is
/// the boundary data of op_A(u0, e_j); the beta block uses op_B(u0^3, e_j).
/// Assembled by reciprocity: one Green solve per receiver per frequency
/// (G is symmetric), exact up to solver roundoff.
struct LinearizedMap {
    Eigen::MatrixXd matrix;
    UnknownLayout layout;
    int num_sources = 0;
    int num_receivers = 0;
};

LinearizedMap assemble_K1(const ForwardContext& ctx, const UnknownLayout& layout);

/// Truncated-SVD pseudoinverse with relative threshold tau.
class RegularizedPseudoinverse {
public:
    RegularizedPseudoinverse(const Eigen::MatrixXd& matrix, double tau);

    Eigen::VectorXd apply(const Eigen::VectorXd& data) const;
    int effective_rank() const { return rank_; }
    double norm() const { return norm_; }  // ||K_1^+|| = 1/sigma_min retained
    double tau() const { return tau_; }
    const Eigen::VectorXd& singular_values() const { return sigma_; }

private:
    Eigen::MatrixXd u_, v_;
    Eigen::VectorXd sigma_;
    int rank_ = 0;
    double tau_ = 0.0;
    double norm_ = 0.0;
};

RegularizedPseudoinverse build_pinv(const LinearizedMap& map, double tau);

/// All compositions (i1,...,in) with parts >= 1, n parts in [min_parts, m],
/// summing to m, in lexicographic order of (n, tuple).
std::vector<std::vector<int>> enumerate_compositions(int m, int min_parts = 2);

/// Inverse-series updates zeta_j = IK_j(phi), j = 1..M:
///   IK_1 = K1+ phi,
///   IK_m = -sum_{n=2..m} sum_{i1+...+in=m} K1+ [K_n(zeta_{i1},...,zeta_{in})]
/// with K_n evaluated per source and restricted to the receivers.
std::vector<Susceptibility> inverse_terms(const ScatteringData& phi, int M,
                                          const RegularizedPseudoinverse& pinv,
                                          const LinearizedMap& map,
                                          const ForwardContext& ctx,
                                          int max_order_guard = 12);

struct ReconstructionResult {
    Susceptibility zeta;                  // sum of terms
    std::vector<Susceptibility> terms;    // IK_1 phi .. IK_M phi
    std::vector<double> term_norms;       // sup norms per term
    double k1phi_norm = 0.0;              // ||IK_1 phi||_inf
    double radius = 0.0;                  // r supplied by the caller
    bool radius_warning = false;          // ||IK_1 phi|| >= r
    double data_norm = 0.0;
};

ReconstructionResult reconstruct(const ScatteringData& phi, int M,
                                 const RegularizedPseudoinverse& pinv,
                                 const LinearizedMap& map, const ForwardContext& ctx,
                                 double radius);

}  // namespace kerrborn

#endif
