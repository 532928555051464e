// Acceptance gate: twelve end-to-end criteria, one PASS/FAIL line each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <vector>

#include "helpers.hpp"
#include "kerrborn/errors.hpp"
#include "kerrborn/experiments.hpp"
#include "kerrborn/forward.hpp"
#include "kerrborn/inversion.hpp"
#include "kerrborn/nu_series.hpp"

using namespace kerrborn;

namespace {

struct Criterion {
    int id;
    const char* label;
    std::function<bool(std::string&)> run;
};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---- 1: analytic Green kernel oracle -------------------------------------

bool c1_green_oracle(std::string& detail) {
    const double k = 1.0;
    Grid g = build_grid(DomainKind::Interval, 512);
    GreenSolver solver(g, k);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.num_nodes());
    const double err =
        kbt::sup_diff(solver.apply_green(ones), kbt::analytic_green_apply(g, k, ones));
    detail = "sup error " + std::to_string(err);
    return err <= 1e-6;
}

// ---- 2: Born partial sums vs the fixed point at half the radius ----------

bool c2_forward_equivalence(std::string& detail) {
    Grid g = build_grid(DomainKind::Interval, 129);
    GreenSolver solver(g, 1.0);
    BackgroundField u0 = solve_background(solver, {0.0, 1.0, 1.0});
    const double mu = estimate_mu(solver);
    GrowthConstants growth = estimate_growth(nu_sequence(u0.u.cwiseAbs().maxCoeff(), 25));
    const double target = 0.5 * forward_radius(mu, growth.K);

    Susceptibility zeta = kbt::random_medium(g, 1.0, 31);
    zeta.beta = zeta.alpha;
    zeta.alpha *= target / zeta.sup_norm();
    zeta.beta *= target / zeta.sup_norm();

    auto [u_fp, rep] = fixed_point_solve(zeta, u0, solver);
    if (!rep.converged) return false;
    TermCache cache;
    BornSum sum = born_partial_sum(zeta, u0, solver, 8, &cache);
    const double err = (sum.field - u_fp).cwiseAbs().maxCoeff();
    const double bound = 1e-6 * u0.u.cwiseAbs().maxCoeff();
    bool decaying = true;
    for (size_t i = 1; i + 1 < sum.term_norms.size(); ++i)  // from order 2 onward
        decaying = decaying && sum.term_norms[i + 1] < sum.term_norms[i];
    detail = "residual " + std::to_string(err) + " (bound " + std::to_string(bound) + ")";
    return err <= bound && decaying;
}

// ---- 3: order extraction via a Vandermonde solve --------------------------

bool c3_order_extraction(std::string& detail) {
    Grid g = build_grid(DomainKind::Interval, 65);
    GreenSolver solver(g, 1.0);
    BackgroundField u0 = solve_background(solver, {0.0, 1.0, 1.0});
    Susceptibility zeta = kbt::random_medium(g, 0.3, 17);
    const int N = 4;
    const std::vector<double> ts{0.4, 0.7, 1.0, 1.3, 1.6};

    // U_N of the t-scaled medium is an exact degree-N polynomial in t, so a
    // square Vandermonde solve recovers the order-n terms up to roundoff
    Eigen::MatrixXd V(ts.size(), N + 1);
    Eigen::MatrixXd rhs(ts.size(), g.num_nodes());
    for (size_t r = 0; r < ts.size(); ++r) {
        rhs.row(r) = born_partial_sum(zeta * ts[r], u0, solver, N).field.transpose();
        for (int c = 0; c <= N; ++c) V(r, c) = std::pow(ts[r], c);
    }
    Eigen::MatrixXd coeffs = V.fullPivLu().solve(rhs);

    std::vector<Susceptibility> pool(N, zeta);
    double worst = 0.0;
    double series_scale = 1.0;
    for (int n = 1; n <= N; ++n) {
        Eigen::VectorXd kn = compute_K(n, std::span<const Susceptibility>(pool.data(), n), u0,
                                       solver);
        if (n == 1) series_scale = kn.cwiseAbs().maxCoeff();
        worst = std::max(
            worst, (coeffs.row(n).transpose() - kn).cwiseAbs().maxCoeff() / series_scale);
    }
    detail = "max relative mismatch " + std::to_string(worst);
    return worst <= 1e-8;
}

// ---- 4: multilinearity in every slot --------------------------------------

bool c4_multilinearity(std::string& detail) {
    Grid g = build_grid(DomainKind::Interval, 65);
    GreenSolver solver(g, 1.0);
    BackgroundField u0 = solve_background(solver, {0.0, 1.0, 1.0});
    double worst = 0.0;
    for (int n = 1; n <= 3; ++n) {
        for (int slot = 0; slot < n; ++slot) {
            std::vector<Susceptibility> base;
            for (int i = 0; i < n; ++i) base.push_back(kbt::random_medium(g, 0.3, 40 + 7 * i));
            Susceptibility extra = kbt::random_medium(g, 0.3, 90 + slot);

            auto eval = [&](const std::vector<Susceptibility>& args) {
                return compute_K(n, std::span<const Susceptibility>(args), u0, solver);
            };
            std::vector<Susceptibility> plus = base, scaled = base;
            plus[slot] = base[slot] + extra;
            scaled[slot].alpha = 3.0 * base[slot].alpha;
            scaled[slot].beta = 3.0 * base[slot].beta;

            Eigen::VectorXd fb = eval(base);
            std::vector<Susceptibility> only = base;
            only[slot] = extra;
            const double scale = std::max(1e-30, fb.cwiseAbs().maxCoeff());
            worst = std::max(worst,
                             (eval(plus) - fb - eval(only)).cwiseAbs().maxCoeff() / scale);
            worst = std::max(worst, (eval(scaled) - 3.0 * fb).cwiseAbs().maxCoeff() / scale);
        }
    }
    detail = "max relative defect " + std::to_string(worst);
    return worst <= 1e-10;
}

// ---- 5: combinatorial counts ----------------------------------------------

bool c5_combinatorics(std::string& detail) {
    for (int n = 0; n <= 20; ++n) {
        std::int64_t brute = 0;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; i + j <= n; ++j) ++brute;
        if (triple_count(n) != brute || brute != n * (n + 1) / 2 + (n + 1)) {
            detail = "triple count mismatch at n = " + std::to_string(n);
            return false;
        }
    }
    for (int m = 2; m <= 6; ++m) {
        std::set<std::vector<int>> brute;
        std::vector<int> cur;
        std::function<void(int)> rec = [&](int rem) {
            if (rem == 0) {
                if (cur.size() >= 2) brute.insert(cur);
                return;
            }
            for (int p = 1; p <= rem; ++p) {
                cur.push_back(p);
                rec(rem - p);
                cur.pop_back();
            }
        };
        rec(m);
        std::set<std::vector<int>> got;
        for (const auto& c : enumerate_compositions(m)) got.insert(c);
        if (got != brute) {
            detail = "composition set mismatch at m = " + std::to_string(m);
            return false;
        }
    }
    detail = "triples n <= 20, compositions m <= 6";
    return true;
}

// ---- 6: generating function and growth envelope ---------------------------

bool c6_generating_function(std::string& detail) {
    NuSequence seq = nu_sequence(1.0, 25);
    if (seq.values[0] != 1.0 || seq.values[1] != 2.0 || seq.values[2] != 8.0) {
        detail = "leading terms wrong";
        return false;
    }
    NuSequence through20 = nu_sequence(1.0, 20);
    if (verify_generating_polynomial(through20) != 0.0) {
        detail = "nonzero rational-mode defect";
        return false;
    }
    GrowthConstants g = estimate_growth(seq);
    double Kn = 1.0;
    for (int n = 0; n <= seq.max_order(); ++n) {
        if (seq.values[n] > g.nu * Kn * (1.0 + 1e-12)) {
            detail = "envelope violated at n = " + std::to_string(n);
            return false;
        }
        Kn *= g.K;
    }
    detail = "K = " + std::to_string(g.K) + ", nu = " + std::to_string(g.nu);
    return true;
}

// ---- 7: multilinear bound shadow on boundary data --------------------------

bool c7_bound_shadow(std::string& detail) {
    Grid g = build_grid(DomainKind::Interval, 65);
    GreenSolver solver(g, 1.0);
    BackgroundField u0 = solve_background(solver, {0.0, 1.0, 1.0});
    const double mu = estimate_mu(solver);
    GrowthConstants growth = estimate_growth(nu_sequence(u0.u.cwiseAbs().maxCoeff(), 25));

    double worst_ratio = 0.0;
    for (unsigned seed : {61u, 62u, 63u}) {
        Susceptibility zeta = kbt::random_medium(g, 0.05, seed);
        const double z = zeta.sup_norm();
        std::vector<Susceptibility> pool(6, zeta);
        for (int n = 1; n <= 6; ++n) {
            Eigen::VectorXd kn = compute_K(n, std::span<const Susceptibility>(pool.data(), n),
                                           u0, solver);
            double bnorm = 0.0;
            for (int b : g.boundary) bnorm = std::max(bnorm, std::abs(kn(b)));
            const double bound = 10.0 * growth.nu * std::pow(growth.K * mu * z, n);
            worst_ratio = std::max(worst_ratio, bnorm / bound);
        }
    }
    detail = "max norm/bound ratio " + std::to_string(worst_ratio);
    return worst_ratio <= 1.0;
}

// ---- 8: contraction-condition checkers vs observed convergence -------------

bool c8_fixed_point_conditions(std::string& detail) {
    Grid g = build_grid(DomainKind::Interval, 65);
    GreenSolver solver(g, 1.0);
    BackgroundField u0 = solve_background(solver, {0.0, 1.0, 1.0});
    const double mu = estimate_mu(solver);
    const double u0n = u0.u.cwiseAbs().maxCoeff();
    const int n = g.num_nodes();

    auto interior_const = [&](double a, double b) {
        Susceptibility z = Susceptibility::zero(n);
        for (int i : g.interior) {
            z.alpha(i) = a;
            z.beta(i) = b;
        }
        return z;
    };
    auto converges_with_q = [&](const Susceptibility& z) {
        try {
            auto [u, rep] = fixed_point_solve(z, u0, solver);
            return rep.converged && rep.contraction_quotient < 1.0;
        } catch (const NonConvergenceError&) {
            return false;
        }
    };

    // 90% of the gamma = 1 general bounds
    Susceptibility gen = interior_const(0.9 / (4.0 * mu), 0.9 / (16.0 * mu * u0n * u0n));
    ContractionConditions cc = check_contraction_conditions(gen, u0, mu);
    if (!cc.general_criterion || !converges_with_q(gen)) {
        detail = "general-bound medium failed";
        return false;
    }

    // randomized in-bound cases for the special checkers
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> frac(0.05, 0.95);
    for (int t = 0; t < 10; ++t) {
        Susceptibility az = interior_const(0.0, frac(rng) * 4.0 / (27.0 * mu * u0n * u0n));
        ContractionConditions ca = check_contraction_conditions(az, u0, mu);
        if (!ca.alpha_zero_criterion || !converges_with_q(az)) {
            detail = "alpha = 0 checker disagreed at trial " + std::to_string(t);
            return false;
        }
        Susceptibility bz = interior_const(frac(rng) / mu, 0.0);
        ContractionConditions cb = check_contraction_conditions(bz, u0, mu);
        if (!cb.beta_zero_criterion || !converges_with_q(bz)) {
            detail = "beta = 0 checker disagreed at trial " + std::to_string(t);
            return false;
        }
    }
    detail = "general + 2 x 10 randomized in-bound cases";
    return true;
}

// ---- 9: interval round trip at reduced amplitude ---------------------------

bool c9_round_trip(std::string& detail) {
    Scenario sc = scenario_1d_paper();
    sc.medium.amplitude = 0.05;
    sc.order = 4;
    ScatteringData phi = synthesize(sc, nullptr, 4);

    Grid grid = build_grid(sc.domain, sc.inversion_resolution);
    ForwardContext ctx(grid, sc.sources);
    UnknownLayout layout = scenario_layout(sc, grid);
    LinearizedMap map = assemble_K1(ctx, layout);
    RegularizedPseudoinverse pinv = build_pinv(map, sc.tau);
    ReconstructionResult rec = reconstruct(phi, sc.order, pinv, map, ctx, 1.0);
    ErrorReport err = evaluate(sc, grid, rec);

    bool nonincreasing = err.trajectory.size() >= 3 &&
                         err.trajectory[1] <= err.trajectory[0] * (1.0 + 1e-9) &&
                         err.trajectory[2] <= err.trajectory[1] * (1.0 + 1e-9);
    detail = "l2 joint error " + std::to_string(err.l2_joint);
    return err.l2_joint <= 0.20 && nonincreasing;
}

// ---- 10: linear reduction, single-cell alpha at 1% contrast ----------------

bool c10_linear_reduction(std::string& detail) {
    Scenario sc;
    sc.name = "single-cell-linear";
    sc.domain = DomainKind::Interval;
    sc.medium.kind = MediumKind::SingleCell;
    sc.medium.amplitude = 1.0;
    sc.medium.center_x = 0.5;
    sc.contrast = 0.01;
    sc.mask = UnknownSelection::AlphaOnly;
    sc.restrict_support = true;
    for (double loc : {0.0, 1.0})
        for (double k : {0.9, 1.0, 1.1}) sc.sources.push_back({loc, 1.0, k});
    sc.synthesis_resolution = 129;
    sc.inversion_resolution = 65;
    sc.order = 1;
    sc.validate();

    ScatteringData phi = synthesize(sc, nullptr, 4);
    Grid grid = build_grid(sc.domain, sc.inversion_resolution);
    ForwardContext ctx(grid, sc.sources);
    LinearizedMap map = assemble_K1(ctx, scenario_layout(sc, grid));
    RegularizedPseudoinverse pinv = build_pinv(map, sc.tau);
    ReconstructionResult rec = reconstruct(phi, 1, pinv, map, ctx, 1.0);
    ErrorReport err = evaluate(sc, grid, rec);
    detail = "alpha l2 error " + std::to_string(err.l2_alpha);
    return err.l2_alpha <= 0.10;
}

// ---- 11: contrast degradation on the disk ----------------------------------

bool c11_contrast_degradation(std::string& detail) {
    auto run_at = [&](double contrast) {
        Scenario sc = scenario_2d(contrast, MediumKind::Disk, UnknownSelection::AlphaOnly);
        ScatteringData phi = synthesize(sc, nullptr, 4);
        Grid grid = build_grid(sc.domain, sc.inversion_resolution);
        ForwardContext ctx(grid, sc.sources);
        LinearizedMap map = assemble_K1(ctx, scenario_layout(sc, grid));
        RegularizedPseudoinverse pinv = build_pinv(map, sc.tau);
        ReconstructionResult rec = reconstruct(phi, sc.order, pinv, map, ctx, 1.0);
        return evaluate(sc, grid, rec).l2_alpha;
    };
    const double weak = run_at(1.0);
    const double strong = run_at(16.0);
    detail = "l2 alpha error " + std::to_string(weak) + " at contrast 1, " +
             std::to_string(strong) + " at 16";
    return strong > weak;
}

// ---- 12: inverse radius formula and warning plumbing -----------------------

bool c12_radius_plumbing(std::string& detail) {
    const double K = 3.0, mu = 0.7;
    InverseRadius ir = inverse_radius(mu, K, 1.0, 1e-6);  // forces C = 2
    const double expected = (std::sqrt(65.0) - 8.0) / (2.0 * K * mu);
    if (ir.C != 2.0 || !close(ir.r, expected, 1e-12 * expected)) {
        detail = "closed form mismatch";
        return false;
    }

    Grid grid = build_grid(DomainKind::Interval, 33);
    ForwardContext ctx(grid, {{0.0, 1.0, 1.0}, {1.0, 1.0, 1.0}});
    LinearizedMap map = assemble_K1(ctx, UnknownLayout::all_interior(ctx.grid()));
    RegularizedPseudoinverse pinv = build_pinv(map, 1e-4);
    ScatteringData phi;
    phi.sources = ctx.sources();
    phi.phi = 1e-3 * Eigen::MatrixXd::Ones(2, 2);
    ReconstructionResult wide = reconstruct(phi, 2, pinv, map, ctx, 1e6);
    ReconstructionResult tight = reconstruct(phi, 2, pinv, map, ctx, 1e-12);
    if (wide.radius_warning || !tight.radius_warning) {
        detail = "warning flag wrong";
        return false;
    }
    detail = "closed form to 1e-12, warning both ways";
    return true;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "analytic Green kernel oracle (interval, k = 1, res 512)", c1_green_oracle},
        {2, "Born partial sums reach the fixed point at half the radius",
         c2_forward_equivalence},
        {3, "order extraction matches Vandermonde coefficients (n <= 4)", c3_order_extraction},
        {4, "series terms multilinear in every slot (n <= 3)", c4_multilinearity},
        {5, "triple and composition enumeration match brute force", c5_combinatorics},
        {6, "majorant sequence: leading terms, exact identity, growth envelope",
         c6_generating_function},
        {7, "boundary-data norms obey the multilinear bound (n <= 6)", c7_bound_shadow},
        {8, "contraction checkers agree with observed convergence", c8_fixed_point_conditions},
        {9, "interval round trip: joint l2 error <= 20%, non-increasing trajectory",
         c9_round_trip},
        {10, "single-cell linear reduction recovers alpha within 10%", c10_linear_reduction},
        {11, "disk reconstruction degrades from contrast 1 to 16", c11_contrast_degradation},
        {12, "inverse radius closed form and data-norm warning", c12_radius_plumbing},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        bool ok = false;
        std::string detail;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.label
                  << " [" << detail << "; " << secs << " s]\n";
        if (!ok) ++failures;
    }
    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: ")
              << (failures == 0 ? std::string() : std::to_string(failures)) << "\n";
    return failures;
}
