#ifndef KERRBORN_FORWARD_HPP
#define KERRBORN_FORWARD_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "kerrborn/green.hpp"
#include "kerrborn/susceptibility.hpp"

namespace kerrborn {

/// A v = -k^2 \int G(x,y) alpha(y) v(y) dy  (Green application of alpha .* v).
/// The minus sign of the integral-equation kernel is absorbed here, so that
/// T(v) = u0 + A v + B v^3 holds exactly.
Eigen::VectorXd op_A(const Eigen::VectorXd& v, const Eigen::VectorXd& alpha,
                     const GreenSolver& solver);

/// Same kernel with beta in the coefficient slot; v is the (already cubed)
/// product supplied by the caller.
Eigen::VectorXd op_B(const Eigen::VectorXd& v, const Eigen::VectorXd& beta,
                     const GreenSolver& solver);

/// T(v) = u0 + A(v, alpha) + B(v^3, beta).
Eigen::VectorXd apply_T(const Eigen::VectorXd& v, const Susceptibility& zeta,
                        const BackgroundField& u0, const GreenSolver& solver);

struct FixedPointReport {
    bool converged = false;
    int iterations = 0;
    double final_residual = 0.0;       // ||v_{m+1} - v_m||_inf at exit
    double contraction_quotient = 0.0; // max over m of successive residual ratios
    double ball_radius = 0.0;          // r = gamma ||u0||_inf
    double ball_bound = 0.0;           // R = ||u0||_inf + r
    double gamma = 1.0;
    std::vector<double> residual_history;
};

/// Iterates v <- T(v) from v = u0 until ||v_{m+1} - v_m||_inf <= tol.
/// Throws NonConvergenceError (with the residual history) past max_iter.
std::pair<Eigen::VectorXd, FixedPointReport> fixed_point_solve(
    const Susceptibility& zeta, const BackgroundField& u0, const GreenSolver& solver,
    double tol = 1e-12, int max_iter = 1000, double gamma = 1.0);

/// Sufficient-condition checks for the fixed-point solver.
struct ContractionConditions {
    double mu = 0.0;
    double gamma = 1.0;
    double u0_norm = 0.0;
    double alpha_norm = 0.0;
    double beta_norm = 0.0;
    double r = 0.0;                 // gamma * ||u0||
    double R = 0.0;                 // ||u0|| + r
    double self_map_value = 0.0;    // mu R (||alpha|| + R^2 ||beta||), must be < r
    double contraction_q = 0.0;     // mu (||alpha|| + 3 R^2 ||beta||), must be < 1
    bool self_mapping = false;
    bool contraction = false;
    bool beta_zero_criterion = false;   // beta == 0 and ||alpha|| < 1/mu
    bool alpha_zero_criterion = false;  // alpha == 0 and ||beta|| < 4/(27 mu ||u0||^2)
    bool general_criterion = false;     // the gamma > 1/2 pair of bounds
    double alpha_bound_general = 0.0;   // (2 gamma - 1) / (2 mu (1 + gamma))
    double beta_bound_general = 0.0;    // 1 / (2 mu ||u0||^2 (1 + gamma)^3)
    double beta_bound_alpha_zero = 0.0; // 4 / (27 mu ||u0||^2)
};

ContractionConditions check_contraction_conditions(const Susceptibility& zeta,
                                                   const BackgroundField& u0,
                                                   double mu, double gamma = 1.0);

/// Number of ordered nonnegative triples (i1,i2,i3) with i1+i2+i3 = n,
/// n(n+1)/2 + (n+1).
std::int64_t triple_count(int n);

/// Memo table for forward-series terms. A cache is valid for one background
/// field and one fixed argument pool; entries are keyed by
/// (order, start offset into the pool), matching the recursion's contiguous
/// argument slicing. Entries equal fresh recomputation bit-for-bit.
class TermCache {
public:
    const Eigen::VectorXd* find(int order, int start) const;
    void insert(int order, int start, Eigen::VectorXd value);
    std::size_t hits() const { return hits_; }
    std::size_t misses() const { return misses_; }
    void clear();

private:
    mutable std::size_t hits_ = 0;
    std::size_t misses_ = 0;
    std::map<std::pair<int, int>, Eigen::VectorXd> table_;
};

/// K_n evaluated on the argument list args[0..n): the recursion
///   K_0 = u0,
///   K_{n}(args) = A(K_{n-1}(args[0..n-1)), alpha_{n-1})
///               + B(sum over i1+i2+i3 = n-1 of
///                     K_{i1}(args[0..i1)) K_{i2}(args[i1..i1+i2)) K_{i3}(...),
///                   beta_{n-1}),
/// built bottom-up (no call-stack recursion). `cache`, when given, must
/// belong to (u0, args) and is filled with all computed sub-slices.
Eigen::VectorXd compute_K(int n, std::span<const Susceptibility> args,
                          const BackgroundField& u0, const GreenSolver& solver,
                          TermCache* cache = nullptr);

struct BornSum {
    Eigen::VectorXd field;              // U_N
    std::vector<double> term_norms;     // ||K_i(zeta,...,zeta)||_inf, i = 1..N
};

/// U_N = u0 + sum_{i=1..N} K_i(zeta,...,zeta).
BornSum born_partial_sum(const Susceptibility& zeta, const BackgroundField& u0,
                         const GreenSolver& solver, int N, TermCache* cache = nullptr);

}  // namespace kerrborn

#endif
