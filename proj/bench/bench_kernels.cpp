// Serial reference vs OpenMP kernels: grid energy/gradient and fractal quadrature.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <cmath>
#include <random>

#include "dplab/experiments.hpp"
#include "dplab/solver.hpp"

using namespace dplab;

namespace {

ObstacleProblem problem(int nodes) {
  ObstacleProblem p;
  p.grid = std::make_shared<const Grid>(2, nodes);
  p.integrand.growth = GrowthFunction::logarithmic();
  p.integrand.q = 1.8;
  p.a = [](std::span<const double> x) { return std::sqrt(std::abs(x[1])); };
  p.boundary = GridFunction(p.grid, 0.0);
  return p;
}

void energy_gradient(benchmark::State& state, Execution ex) {
  const ObstacleProblem p = problem(static_cast<int>(state.range(0)));
  IntegrandSpec sp = p.integrand;
  sp.delta_moll = 1e-3;
  const DiscreteEnergy E(p, sp, 0.01);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GridFunction w(p.grid);
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = u(rng);
  std::vector<double> g(w.size());
  for (auto _ : state) benchmark::DoNotOptimize(E.value_and_gradient(w, g, ex));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(p.grid->num_cells()));
}

void BM_EnergyGradientSerial(benchmark::State& s) { energy_gradient(s, Execution::serial); }
void BM_EnergyGradientParallel(benchmark::State& s) { energy_gradient(s, Execution::parallel); }

// threads = 1 is the serial reference of the same kernel
void BM_QuadratureEnergy(benchmark::State& state) {
  CounterexampleConfig c;
  c.cantor = {2, 0.15, 10};
  c.alpha = 0.5;
  c.q = 1.8;
  const Counterexample ce(c);
  QuadratureOptions o;
  o.grading_levels = 10;
  const FractalQuadrature Q(ce, o);
  const int before = omp_get_max_threads();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Q.energy_u0(1.0).value);
  omp_set_num_threads(before);
}

void BM_QuadraturePairing(benchmark::State& state) {
  CounterexampleConfig c;
  c.cantor = {2, 0.15, 8};
  c.alpha = 0.5;
  c.q = 1.8;
  const Counterexample ce(c);
  QuadratureOptions o;
  o.grading_levels = 8;
  const FractalQuadrature Q(ce, o);
  const int before = omp_get_max_threads();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Q.pairing().value);
  omp_set_num_threads(before);
}

}  // namespace

BENCHMARK(BM_EnergyGradientSerial)->Arg(129)->Arg(257)->Arg(513)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnergyGradientParallel)->Arg(129)->Arg(257)->Arg(513)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuadratureEnergy)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_QuadraturePairing)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
