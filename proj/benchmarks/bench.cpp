#include <benchmark/benchmark.h>

#include <random>

#include "kerrborn/experiments.hpp"
#include "kerrborn/forward.hpp"
#include "kerrborn/green.hpp"
#include "kerrborn/inversion.hpp"
#include "kerrborn/nu_series.hpp"

using namespace kerrborn;

namespace {

Eigen::VectorXd random_vec(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = dist(rng);
    return v;
}

Susceptibility small_medium(const Grid& g, double amp) {
    Susceptibility z(random_vec(g.num_nodes(), 3), random_vec(g.num_nodes(), 4));
    z.clamp_to_interior(g);
    return z * (amp / z.sup_norm());
}

void BM_GreenApply_Interval(benchmark::State& state) {
    Grid g = build_grid(DomainKind::Interval, static_cast<int>(state.range(0)));
    GreenSolver solver(g, 1.0);
    Eigen::VectorXd v = random_vec(g.num_nodes(), 1);
    for (auto _ : state) benchmark::DoNotOptimize(solver.apply_green(v));
}
BENCHMARK(BM_GreenApply_Interval)->Arg(129)->Arg(513)->Arg(2049);

void BM_GreenApply_Disk(benchmark::State& state) {
    Grid g = build_grid(DomainKind::Disk, static_cast<int>(state.range(0)));
    GreenSolver solver(g, 1.0);
    Eigen::VectorXd v = random_vec(g.num_nodes(), 1);
    for (auto _ : state) benchmark::DoNotOptimize(solver.apply_green(v));
}
BENCHMARK(BM_GreenApply_Disk)->Arg(16)->Arg(32)->Arg(48);

void BM_FixedPoint(benchmark::State& state) {
    Grid g = build_grid(DomainKind::Interval, 257);
    GreenSolver solver(g, 1.0);
    BackgroundField u0 = solve_background(solver, {0.0, 1.0, 1.0});
    Susceptibility z = small_medium(g, 0.05);
    for (auto _ : state) benchmark::DoNotOptimize(fixed_point_solve(z, u0, solver));
}
BENCHMARK(BM_FixedPoint);

void BM_ComputeK(benchmark::State& state) {
    Grid g = build_grid(DomainKind::Interval, 129);
    GreenSolver solver(g, 1.0);
    BackgroundField u0 = solve_background(solver, {0.0, 1.0, 1.0});
    Susceptibility z = small_medium(g, 0.05);
    const int n = static_cast<int>(state.range(0));
    std::vector<Susceptibility> pool(n, z);
    for (auto _ : state) {
        TermCache cache;  // cold cache each iteration: measures the full DP sweep
        benchmark::DoNotOptimize(
            compute_K(n, std::span<const Susceptibility>(pool), u0, solver, &cache));
    }
}
BENCHMARK(BM_ComputeK)->Arg(2)->Arg(4)->Arg(6)->Arg(8);

void BM_NuSequenceExact(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(nu_sequence(1.0, N));
}
BENCHMARK(BM_NuSequenceExact)->Arg(25)->Arg(50);

void BM_AssembleK1(benchmark::State& state) {
    Grid g = build_grid(DomainKind::Interval, static_cast<int>(state.range(0)));
    std::vector<Source> sources;
    for (double loc : {0.0, 1.0})
        for (double k : {0.9, 1.0, 1.1}) sources.push_back({loc, 1.0, k});
    ForwardContext ctx(g, sources);
    UnknownLayout layout = UnknownLayout::all_interior(g);
    for (auto _ : state) benchmark::DoNotOptimize(assemble_K1(ctx, layout));
}
BENCHMARK(BM_AssembleK1)->Arg(65)->Arg(129);

void BM_InverseTerms(benchmark::State& state) {
    Grid g = build_grid(DomainKind::Interval, 49);
    std::vector<Source> sources{{0.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, {0.0, 1.0, 1.1}};
    ForwardContext ctx(g, sources);
    LinearizedMap map = assemble_K1(ctx, UnknownLayout::all_interior(g));
    RegularizedPseudoinverse pinv = build_pinv(map, 1e-3);
    ScatteringData phi;
    phi.sources = sources;
    phi.phi = 1e-3 * Eigen::MatrixXd::Ones(3, 2);
    const int M = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(inverse_terms(phi, M, pinv, map, ctx));
}
BENCHMARK(BM_InverseTerms)->Arg(2)->Arg(3)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
