#include <benchmark/benchmark.h>

#include "sdde/builtins.hpp"
#include "sdde/noise.hpp"
#include "sdde/rds.hpp"
#include "sdde/solver.hpp"

using namespace sdde;

namespace {

void BM_sample_path(benchmark::State& state) {
  const auto steps = static_cast<double>(state.range(0));
  for (auto _ : state) {
    BrownianPath p = BrownianPath::sample_window(42, 0.0, steps * 1e-3, 1e-3, 2);
    benchmark::DoNotOptimize(p.value(p.n_steps(), 0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_sample_path)->Arg(1000)->Arg(10000);

void BM_solve_direct_lv(benchmark::State& state) {
  BuiltSystem lv = make_builtin("lv-box");
  const auto steps = static_cast<double>(state.range(0));
  BrownianPath path = BrownianPath::sample_window(7, 0.0, steps * 1e-3, 1e-3, 2);
  Segment eta = Segment::constant(0.5, {0.7, 1.1});
  for (auto _ : state) {
    SddeRun run = solve_direct(lv.sys, path, 0.0, eta, steps * 1e-3, 1e-3);
    benchmark::DoNotOptimize(run.trajectory.value(run.trajectory.grid().n_steps, 0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_solve_direct_lv)->Arg(1000)->Arg(5000);

void BM_solve_conjugated_analytic(benchmark::State& state) {
  BuiltSystem lin = make_builtin("linear-delay");
  BrownianPath path = BrownianPath::sample_window(7, 0.0, 1.0, 1e-3, 1);
  Segment eta = Segment::constant(0.5, {1.0});
  for (auto _ : state) {
    SddeRun run = solve_conjugated(lin.sys, path, 0.0, eta, 1.0, 1e-3, FlowMode::ANALYTIC);
    benchmark::DoNotOptimize(run.trajectory.value(run.trajectory.grid().n_steps, 0));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_solve_conjugated_analytic);

void BM_cocycle_apply_biochem(benchmark::State& state) {
  BuiltSystem b = make_builtin("biochem");
  Cocycle c(b.sys, 11, 0.0, 2.0, 1e-2);
  Segment eta = Segment::constant(0.5, {0.5, 0.5, 0.5});
  for (auto _ : state) {
    Segment out = c.apply(1.0, ShiftIndex{0}, eta);
    benchmark::DoNotOptimize(out.endpoint(0));
  }
}
BENCHMARK(BM_cocycle_apply_biochem);

void BM_equilibrium_quadrature(benchmark::State& state) {
  BuiltSystem b = make_builtin("biochem");
  BrownianPath path = BrownianPath::sample_window(13, 40.5, 0.0, 1e-3, 3);
  for (auto _ : state) {
    EquilibriumTable t = biochem_equilibrium_table(*b.biochem, path, 40.0, 1e-3, 1e-3);
    benchmark::DoNotOptimize(t.value(path.origin(), 0));
  }
}
BENCHMARK(BM_equilibrium_quadrature);

}  // namespace

BENCHMARK_MAIN();
