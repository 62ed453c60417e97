#include <benchmark/benchmark.h>

#include <cmath>

#include "levyhom/kernel.hpp"

using namespace levyhom;

namespace {

GridFunction cosine(int n, int k) {
  GridFunction u = GridFunction::torus(n, 1.0);
  for (int i = 0; i < n; ++i) u.at(i) = std::cos(2.0 * M_PI * k * u.node(i));
  return u;
}

void BM_BuildKernel(benchmark::State& st) {
  const int n = int(st.range(0));
  const double h = 1.0 / n;
  for (auto _ : st) {
    LevyKernel k = build_kernel(1.5, h, 4 * h, 2.0);
    benchmark::DoNotOptimize(k.tail_constant);
  }
}

void BM_ApplyTorus(benchmark::State& st) {
  const int n = int(st.range(0));
  const double h = 1.0 / n;
  LevyKernel k = build_kernel(1.5, h, 4 * h, 2.0);
  GridFunction u = cosine(n, 1);
  for (auto _ : st) {
    GridFunction out = apply_levy(k, u);
    benchmark::DoNotOptimize(out.values().data());
  }
  st.SetItemsProcessed(st.iterations() * n);
}

void BM_ApplyLifted(benchmark::State& st) {
  const int n = int(st.range(0));
  LevyKernel k = build_kernel(1.5, 1.0 / n, 4.0 / n, 2.0, {16.0});
  LiftedDirection dir{{1.0, 1.0 / 1.6180339887498949}};
  TorusGrid2 w(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) w.at(i, j) = std::cos(2.0 * M_PI * (double(i) / n));
  for (auto _ : st) {
    TorusGrid2 out = apply_levy_lifted(k, w, dir);
    benchmark::DoNotOptimize(out.values().data());
  }
}

void BM_AnalyticSymbol(benchmark::State& st) {
  for (auto _ : st) {
    double s = analytic_symbol(1.5, 4);
    benchmark::DoNotOptimize(s);
  }
}

}  // namespace

BENCHMARK(BM_BuildKernel)->Arg(512)->Arg(2048);
BENCHMARK(BM_ApplyTorus)->Arg(512)->Arg(2048);
BENCHMARK(BM_ApplyLifted)->Arg(32)->Arg(48);
BENCHMARK(BM_AnalyticSymbol);
