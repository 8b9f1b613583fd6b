#include <benchmark/benchmark.h>

#include "paretopt/driver.hpp"

using namespace paretopt;

namespace {

MooProblem quadrant_problem() {
    MooProblem mp;
    mp.n = 2;
    Polynomial f1(2), f2(2), f3(2), g1(2), g2(2);
    f1.add_term(Exponent{2, 0}, 1.0);
    f1.add_term(Exponent{0, 2}, 1.0);
    f1.add_term(Exponent{1, 0}, -6.0);
    f1.add_term(Exponent{0, 1}, -4.0);
    f1.add_term(Exponent{0, 0}, 13.0);
    f2.add_term(Exponent{1, 0}, 1.0);
    f2.add_term(Exponent{0, 1}, 1.0);
    f3.add_term(Exponent{1, 0}, 1.0);
    f3.add_term(Exponent{0, 1}, 2.0);
    g1.add_term(Exponent{1, 0}, -1.0);
    g2.add_term(Exponent{0, 1}, -1.0);
    mp.objectives = {f1, f2, f3};
    mp.constraints = {g1, g2};
    mp.lambda = Eigen::Vector3d::Ones();
    return mp;
}

}  // namespace

static void BM_MomentMatrix(benchmark::State& state) {
    const int n = 2;
    const int k = static_cast<int>(state.range(0));
    Eigen::VectorXd x(n);
    x << 0.7, -0.3;
    MomentVector y = dirac_moments(x, 2 * k);
    for (auto _ : state) {
        benchmark::DoNotOptimize(moment_matrix(y, k));
    }
}
BENCHMARK(BM_MomentMatrix)->Arg(1)->Arg(2)->Arg(3)->Arg(4);

static void BM_BuildP(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    MooProblem mp = quadrant_problem();
    HybridProblem hp = HybridProblem::at(mp, Eigen::Vector2d(1.0, 1.0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_p(hp, k));
    }
}
BENCHMARK(BM_BuildP)->Arg(1)->Arg(2)->Arg(3);

static void BM_SolveRelaxation(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    MooProblem mp = quadrant_problem();
    HybridProblem hp = HybridProblem::at(mp, Eigen::Vector2d(1.0, 1.0));
    SdpInstance inst = build_p(hp, k);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve(inst));
    }
}
BENCHMARK(BM_SolveRelaxation)->Arg(1)->Arg(2)->Arg(3);

static void BM_SolveHybridEndToEnd(benchmark::State& state) {
    MooProblem mp = quadrant_problem();
    SweepConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_hybrid(mp, Eigen::Vector2d(1.0, 1.0), cfg));
    }
}
BENCHMARK(BM_SolveHybridEndToEnd);

static void BM_ExtractTwoAtoms(benchmark::State& state) {
    Eigen::Vector2d a(0.0, 0.0), b(2.0, 1.0);
    MomentVector ya = dirac_moments(a, 4);
    MomentVector yb = dirac_moments(b, 4);
    MomentVector y(2, 4);
    for (int i = 0; i < y.basis().size(); ++i)
        y.set(y.basis()[i], 0.5 * (ya.values()(i) + yb.values()(i)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(extract_atoms(y, 2, 1));
    }
}
BENCHMARK(BM_ExtractTwoAtoms);

BENCHMARK_MAIN();
