#include "kerrborn/forward.hpp"

#include <cmath>
#include <sstream>

#include "kerrborn/errors.hpp"

namespace kerrborn {

Eigen::VectorXd op_A(const Eigen::VectorXd& v, const Eigen::VectorXd& alpha,
                     const GreenSolver& solver) {
    if (v.size() != alpha.size() || v.size() != solver.grid().num_nodes())
        throw ShapeError("op_A: shapes do not match grid");
    return solver.apply_green(alpha.cwiseProduct(v));
}

Eigen::VectorXd op_B(const Eigen::VectorXd& v, const Eigen::VectorXd& beta,
                     const GreenSolver& solver) {
    if (v.size() != beta.size() || v.size() != solver.grid().num_nodes())
        throw ShapeError("op_B: shapes do not match grid");
    return solver.apply_green(beta.cwiseProduct(v));
}

Eigen::VectorXd apply_T(const Eigen::VectorXd& v, const Susceptibility& zeta,
                        const BackgroundField& u0, const GreenSolver& solver) {
    const Eigen::VectorXd cube = v.array().cube().matrix();
    return u0.u + op_A(v, zeta.alpha, solver) + op_B(cube, zeta.beta, solver);
}

std::pair<Eigen::VectorXd, FixedPointReport> fixed_point_solve(
    const Susceptibility& zeta, const BackgroundField& u0, const GreenSolver& solver,
    double tol, int max_iter, double gamma) {
    if (!(tol > 0)) throw DomainError("fixed_point_solve: tol must be positive");
    if (max_iter < 1) throw DomainError("fixed_point_solve: max_iter must be positive");

    FixedPointReport report;
    report.gamma = gamma;
    const double u0_norm = u0.u.cwiseAbs().maxCoeff();
    report.ball_radius = gamma * u0_norm;
    report.ball_bound = u0_norm + report.ball_radius;

    Eigen::VectorXd v = u0.u;
    double prev_residual = -1.0;
    for (int m = 0; m < max_iter; ++m) {
        Eigen::VectorXd next = apply_T(v, zeta, u0, solver);
        const double residual = (next - v).cwiseAbs().maxCoeff();
        report.residual_history.push_back(residual);
        if (prev_residual > 0)
            report.contraction_quotient =
                std::max(report.contraction_quotient, residual / prev_residual);
        prev_residual = residual;
        v = std::move(next);
        report.iterations = m + 1;
        report.final_residual = residual;
        if (residual <= tol) {
            report.converged = true;
            return {v, report};
        }
    }
    std::ostringstream os;
    os << "fixed-point iteration did not reach tol=" << tol << " in " << max_iter
       << " iterations (last residual " << report.final_residual
       << "); contraction conditions likely violated";
    throw NonConvergenceError(os.str(), report.residual_history);
}

ContractionConditions check_contraction_conditions(const Susceptibility& zeta,
                                                   const BackgroundField& u0,
                                                   double mu, double gamma) {
    if (!(mu > 0)) throw DomainError("check_contraction_conditions: mu must be positive");
    if (!(gamma > 0.5)) throw DomainError("check_contraction_conditions: gamma must exceed 1/2");

    ContractionConditions c;
    c.mu = mu;
    c.gamma = gamma;
    c.u0_norm = u0.u.cwiseAbs().maxCoeff();
    c.alpha_norm = zeta.alpha.size() ? zeta.alpha.cwiseAbs().maxCoeff() : 0.0;
    c.beta_norm = zeta.beta.size() ? zeta.beta.cwiseAbs().maxCoeff() : 0.0;
    c.r = gamma * c.u0_norm;
    c.R = c.u0_norm + c.r;

    c.self_map_value = mu * c.R * (c.alpha_norm + c.R * c.R * c.beta_norm);
    c.self_mapping = c.self_map_value < c.r;
    c.contraction_q = mu * (c.alpha_norm + 3.0 * c.R * c.R * c.beta_norm);
    c.contraction = c.contraction_q < 1.0;

    c.beta_zero_criterion = c.beta_norm == 0.0 && c.alpha_norm < 1.0 / mu;
    c.beta_bound_alpha_zero = 4.0 / (27.0 * mu * c.u0_norm * c.u0_norm);
    c.alpha_zero_criterion = c.alpha_norm == 0.0 && c.beta_norm < c.beta_bound_alpha_zero;

    c.alpha_bound_general = (2.0 * gamma - 1.0) / (2.0 * mu * (1.0 + gamma));
    c.beta_bound_general =
        1.0 / (2.0 * mu * c.u0_norm * c.u0_norm * std::pow(1.0 + gamma, 3));
    c.general_criterion =
        c.alpha_norm < c.alpha_bound_general && c.beta_norm < c.beta_bound_general;
    return c;
}

std::int64_t triple_count(int n) {
    if (n < 0) throw DomainError("triple_count: n must be nonnegative");
    const std::int64_t m = n;
    return m * (m + 1) / 2 + (m + 1);
}

const Eigen::VectorXd* TermCache::find(int order, int start) const {
    auto it = table_.find({order, start});
    if (it == table_.end()) return nullptr;
    ++hits_;
    return &it->second;
}

void TermCache::insert(int order, int start, Eigen::VectorXd value) {
    ++misses_;
    table_.emplace(std::make_pair(order, start), std::move(value));
}

void TermCache::clear() {
    table_.clear();
    hits_ = misses_ = 0;
}

Eigen::VectorXd compute_K(int n, std::span<const Susceptibility> args,
                          const BackgroundField& u0, const GreenSolver& solver,
                          TermCache* cache) {
    if (static_cast<int>(args.size()) != n)
        throw ShapeError("compute_K: expected exactly n argument susceptibilities");
    if (n == 0) return u0.u;

    TermCache local;
    TermCache& memo = cache ? *cache : local;

    // dynamic programming over (order m, start s), s + m <= n
    auto get = [&](int m, int s) -> const Eigen::VectorXd& {
        return *memo.find(m, s);  // filled by the ascending-order sweep below
    };
    for (int m = 0; m <= n; ++m) {
        for (int s = 0; s + m <= n; ++s) {
            if (memo.find(m, s)) continue;
            if (m == 0) {
                memo.insert(0, s, u0.u);
                continue;
            }
            const Susceptibility& last = args[s + m - 1];
            Eigen::VectorXd va = get(m - 1, s);
            Eigen::VectorXd vb = Eigen::VectorXd::Zero(u0.u.size());
            for (int i1 = 0; i1 <= m - 1; ++i1) {
                for (int i2 = 0; i2 <= m - 1 - i1; ++i2) {
                    const int i3 = m - 1 - i1 - i2;
                    vb += get(i1, s)
                              .cwiseProduct(get(i2, s + i1))
                              .cwiseProduct(get(i3, s + i1 + i2));
                }
            }
            memo.insert(m, s,
                        op_A(va, last.alpha, solver) + op_B(vb, last.beta, solver));
        }
    }
    return *memo.find(n, 0);
}

BornSum born_partial_sum(const Susceptibility& zeta, const BackgroundField& u0,
                         const GreenSolver& solver, int N, TermCache* cache) {
    if (N < 0) throw DomainError("born_partial_sum: N must be nonnegative");
    std::vector<Susceptibility> pool(N, zeta);
    BornSum sum;
    sum.field = u0.u;
    TermCache local;
    TermCache& memo = cache ? *cache : local;
    for (int i = 1; i <= N; ++i) {
        Eigen::VectorXd term =
            compute_K(i, std::span<const Susceptibility>(pool.data(), i), u0, solver, &memo);
        sum.term_norms.push_back(term.cwiseAbs().maxCoeff());
        sum.field += term;
    }
    return sum;
}

}  // namespace kerrborn
