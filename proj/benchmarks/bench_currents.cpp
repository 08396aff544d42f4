#include <benchmark/benchmark.h>

#include <cstdint>

#include "morphoflow/currents.hpp"
#include "morphoflow/shapes.hpp"

using namespace morphoflow;

namespace {

SurfaceMesh sphere_for(int subdivisions, double radius) {
  return make_icosphere(subdivisions, radius);
}

void BM_currents_inner(benchmark::State& state) {
  const int subdiv = static_cast<int>(state.range(0));
  const SurfaceMesh a = sphere_for(subdiv, 1.0);
  const SurfaceMesh b = sphere_for(subdiv, 1.2);
  const CurrentRep ra = current_of(a);
  const CurrentRep rb = current_of(b);
  const CurrentsParams params{default_sigma_w(b), CurrentsKernel::Gaussian};
  for (auto _ : state) {
    benchmark::DoNotOptimize(currents_inner(ra, rb, params));
  }
  state.SetComplexityN(static_cast<std::int64_t>(a.face_count()));
}

void BM_data_term_E(benchmark::State& state) {
  const int subdiv = static_cast<int>(state.range(0));
  const SurfaceMesh a = sphere_for(subdiv, 1.0);
  const SurfaceMesh b = sphere_for(subdiv, 1.2);
  const CurrentRep rb = current_of(b);
  const CurrentsParams params{default_sigma_w(b), CurrentsKernel::Gaussian};
  for (auto _ : state) {
    benchmark::DoNotOptimize(data_term_E(a, rb, params));
  }
  state.SetComplexityN(static_cast<std::int64_t>(a.face_count()));
}

void BM_grad_data_term(benchmark::State& state) {
  const int subdiv = static_cast<int>(state.range(0));
  const SurfaceMesh a = sphere_for(subdiv, 1.0);
  const SurfaceMesh b = sphere_for(subdiv, 1.2);
  const CurrentRep rb = current_of(b);
  const CurrentsParams params{default_sigma_w(b), CurrentsKernel::Gaussian};
  for (auto _ : state) {
    benchmark::DoNotOptimize(grad_data_term(a, rb, params));
  }
  state.SetComplexityN(static_cast<std::int64_t>(a.face_count()));
}

} // namespace

BENCHMARK(BM_currents_inner)->DenseRange(1, 4)->Complexity(benchmark::oNSquared);
BENCHMARK(BM_data_term_E)->DenseRange(1, 3)->Complexity(benchmark::oNSquared);
BENCHMARK(BM_grad_data_term)->DenseRange(1, 3)->Complexity(benchmark::oNSquared);

BENCHMARK_MAIN();
