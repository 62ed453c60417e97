#include <benchmark/benchmark.h>

#include <cmath>

#include "levyhom/ergodic.hpp"
#include "levyhom/hjb.hpp"

using namespace levyhom;

namespace {

DiscountedProblem torus_problem(int n) {
  DiscountedProblem dp;
  dp.lambda = 0.01;
  dp.n = n;
  dp.kernel = build_kernel(1.5, 1.0 / n, 4.0 / n, 2.0);
  dp.beta = {0.0};
  dp.cost = {0.0};
  dp.forcing = [](double y) { return std::cos(2.0 * M_PI * y); };
  return dp;
}

void BM_SolveDiscounted(benchmark::State& st) {
  DiscountedProblem dp = torus_problem(int(st.range(0)));
  for (auto _ : st) {
    GridFunction v = solve_discounted(dp);
    benchmark::DoNotOptimize(v.values().data());
  }
}

void BM_SolveDiscountedControls(benchmark::State& st) {
  DiscountedProblem dp = torus_problem(int(st.range(0)));
  dp.kernel.reset();
  dp.beta = {1.0, -1.0};
  dp.cost = {0.0, 0.1};
  dp.forcing = [](double y) { return 1.0 - std::cos(2.0 * M_PI * y); };
  for (auto _ : st) {
    GridFunction v = solve_discounted(dp);
    benchmark::DoNotOptimize(v.values().data());
  }
}

void BM_SolveLifted(benchmark::State& st) {
  const int n = int(st.range(0));
  LiftedProblem lp;
  lp.lambda = 0.01;
  lp.n1 = lp.n2 = n;
  lp.kernel = build_kernel(1.5, 1.0 / n, 4.0 / n, 2.0, {16.0});
  const double phi = 1.6180339887498949;
  lp.dir.gammas_inv = {1.0, 1.0 / phi};
  lp.beta = {0.0};
  lp.cost = {0.0};
  lp.forcing = MultiscaleForcing(MultiscaleForcing::Mode::QuasiPeriodic, {1.0, phi},
                                 {{1.0, {{1, 1, 0.0}}}, {1.0, {{2, 1, 0.0}}}});
  for (auto _ : st) {
    TorusGrid2 w = solve_discounted_lifted(lp);
    benchmark::DoNotOptimize(w.values().data());
  }
}

void BM_ControlValueOracle(benchmark::State& st) {
  CellProblemSpec spec;
  spec.kase = CellCase::I;
  spec.alpha = 0.5;
  spec.controls = ControlField({{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}});
  spec.forcing = MultiscaleForcing(MultiscaleForcing::Mode::QuasiPeriodic, {1.0},
                                   {{-1.0, {{1, 1, 0.0}}}});
  for (auto _ : st) {
    double v = control_value_oracle(spec, 0.01, 0.3);
    benchmark::DoNotOptimize(v);
  }
}

}  // namespace

BENCHMARK(BM_SolveDiscounted)->Arg(256)->Arg(512);
BENCHMARK(BM_SolveDiscountedControls)->Arg(512);
BENCHMARK(BM_SolveLifted)->Arg(32);
BENCHMARK(BM_ControlValueOracle);
