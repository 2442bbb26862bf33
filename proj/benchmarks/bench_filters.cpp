// Per-round cost of the distributed recursions and of the offline design steps.

#include <benchmark/benchmark.h>

#include <random>
#include <variant>

#include "armagf/design.hpp"
#include "armagf/dynamics.hpp"
#include "armagf/filters.hpp"
#include "armagf/fir.hpp"

using namespace armagf;

namespace {

const LaplacianVariant kShifted{LaplacianKind::shifted_normalized, std::nullopt};

Operator shifted_laplacian(int n) {
  const Graph g = random_geometric_graph(n, default_connection_radius() * std::sqrt(100.0 / n), 1).graph;
  return build_laplacian(g, kShifted);
}

Signal random_input(Eigen::Index n) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Signal x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = u(rng);
  return x;
}

DesignReport step_design(int K, Architecture arch) {
  return design_arma(named_target("lowpass", -0.5), K, kShifted.bounds(), arch);
}

void BM_ParallelStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Operator L = shifted_laplacian(n);
  const Signal x = random_input(n);
  const auto coeffs = std::get<ArmaParallelCoefficients>(step_design(5, Architecture::parallel).coefficients);
  FilterState s = FilterState::zeros(coeffs.branches.size(), n);
  for (auto _ : state) benchmark::DoNotOptimize(parallel_step(s, L, x, coeffs));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ParallelStep)->Arg(100)->Arg(1000)->Arg(4000);

void BM_PeriodicStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Operator L = shifted_laplacian(n);
  const Signal x = random_input(n);
  const auto coeffs = std::get<ArmaPeriodicCoefficients>(step_design(5, Architecture::periodic).coefficients);
  FilterState s = FilterState::zeros(1, n);
  for (auto _ : state) benchmark::DoNotOptimize(periodic_step(s, L, x, coeffs));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PeriodicStep)->Arg(100)->Arg(1000)->Arg(4000);

void BM_FirApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Operator L = shifted_laplacian(n);
  const Signal x = random_input(n);
  const FirDesign fir = fir_design_ls(named_target("lowpass", -0.5), 5, kShifted.bounds());
  for (auto _ : state) benchmark::DoNotOptimize(fir_apply_static(fir.coeffs, L, x));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FirApply)->Arg(100)->Arg(1000)->Arg(4000);

void BM_DesignArma(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(step_design(K, Architecture::parallel));
}
BENCHMARK(BM_DesignArma)->DenseRange(2, 10, 4);

void BM_SpectralDecompose(benchmark::State& state) {
  const Operator L = shifted_laplacian(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(spectral_decompose(L));
}
BENCHMARK(BM_SpectralDecompose)->Arg(50)->Arg(200)->Arg(500);

}  // namespace

BENCHMARK_MAIN();
