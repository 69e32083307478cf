#include "phasesep/coupled.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

using namespace phasesep;

namespace {

BoundaryFn zero_boundary() {
    return [](const Point2&) { return 0.0; };
}

/// Radial disk case with f = 40 (u - u^3), built once and shared by the benchmarks.
struct DiskSetup {
    ProfileSolution profile = solve_profile(12.0, 2401, 1e-10);
    ProfileW W = solve_W(profile, 1e-8);
    ProfileSampler sampler{profile, W};
    Nonlinearity f = Nonlinearity::cubic(40.0);
    LimitSolution limit;
    MatchingCoefficients matching;

    DiskSetup() {
        RadialGrading g;
        g.h_coarse = 1.0 / 256.0;
        auto mesh = std::make_shared<const PolarMesh>(PolarMesh::make(GeometryKind::Disk, 0.0, 1.0, 1, g));
        const LimitSolution first =
            solve_limit(mesh, f, radial_initial_guess(*mesh, 0.8, zero_boundary()), zero_boundary(), 1e-10);
        g.h_fine = 1.0 / 2048.0;
        g.band = 0.05;
        limit = fit_interface_mesh(first, f, g, 1, 1e-10);
        const MatchingContext ctx = make_matching_context(limit, f, nondegeneracy_margins(limit, f), profile.A, profile.B);
        const MatchingOrder1 o1 = solve_matching_order1(ctx);
        matching = collect(ctx, o1, solve_matching_order2(ctx, o1, f));
    }
};

const DiskSetup& disk() {
    static const DiskSetup s;
    return s;
}

void BM_Profile(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_profile(12.0, n, 1e-10).A);
}
BENCHMARK(BM_Profile)->Arg(1201)->Arg(2401)->Arg(4801)->Unit(benchmark::kMillisecond);

void BM_DtNApply(benchmark::State& state) {
    const int nt = static_cast<int>(state.range(0));
    RadialGrading g;
    g.focus = 0.5;
    g.h_coarse = 1.0 / 128.0;
    g.h_fine = 1.0 / 512.0;
    g.band = 0.15;
    const auto mesh = std::make_shared<const PolarMesh>(PolarMesh::make(GeometryKind::Disk, 0.0, 1.0, nt, g));
    const DtNOperator D(mesh, mesh->ring_at(0.5, 1e-12), -1, Vec::Zero(mesh->size()));
    Vec trace(nt);
    for (int j = 0; j < nt; ++j) trace(j) = std::cos(3.0 * mesh->theta(j));
    for (auto _ : state) benchmark::DoNotOptimize(D.apply(trace).data());
}
BENCHMARK(BM_DtNApply)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_CoupledRadial(benchmark::State& state) {
    const DiskSetup& s = disk();
    const double beta = std::pow(10.0, static_cast<double>(state.range(0)));
    SolveConfig cfg;
    cfg.betas = {beta};
    const PipelineInputs in{&s.limit, &s.matching, &s.sampler, &s.f};
    for (auto _ : state) benchmark::DoNotOptimize(continuation_run(cfg, in).front().solution.residual_sup);
}
BENCHMARK(BM_CoupledRadial)->DenseRange(4, 7)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
