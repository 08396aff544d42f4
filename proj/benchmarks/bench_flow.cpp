#include <benchmark/benchmark.h>

#include <cstdint>

#include "morphoflow/flow.hpp"
#include "morphoflow/match.hpp"
#include "morphoflow/shapes.hpp"

using namespace morphoflow;

namespace {

MomentumField sample_field(const SurfaceMesh& source, int n_steps) {
  // Constant small outward momenta; integrate_flow fills the trajectories.
  PointList alpha(source.vertex_count());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    alpha[i] = 0.02 * source.vertices[i].normalized();
  }
  MomentumField proto;
  proto.control_trajectories.assign(static_cast<std::size_t>(n_steps) + 1, source.vertices);
  proto.momenta.assign(static_cast<std::size_t>(n_steps), alpha);
  proto.sigma_v = 0.25 * bounding_box(source).diagonal();
  proto.gamma = 0.01;
  proto.n_steps = n_steps;
  proto.control_trajectories = integrate_flow(source.vertices, proto, 1.0);
  return proto;
}

void BM_integrate_flow(benchmark::State& state) {
  const SurfaceMesh sphere = make_icosphere(static_cast<int>(state.range(0)), 1.0);
  const MomentumField field = sample_field(sphere, 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_flow(sphere.vertices, field, 1.0));
  }
  state.SetComplexityN(static_cast<std::int64_t>(sphere.vertex_count()));
}

void BM_objective_gradient(benchmark::State& state) {
  const SurfaceMesh source = make_icosphere(static_cast<int>(state.range(0)), 1.0);
  const SurfaceMesh target = make_icosphere(static_cast<int>(state.range(0)), 1.2);
  const CurrentRep target_rep = current_of(target);
  const CurrentsParams currents{default_sigma_w(target), CurrentsKernel::Gaussian};
  const std::vector<PointList> momenta(10, PointList(source.vertex_count(), Vec3::Zero()));
  const double sigma_v = 0.25 * bounding_box(source).diagonal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        objective_gradient(source, target_rep, momenta, sigma_v, 0.01, currents));
  }
  state.SetComplexityN(static_cast<std::int64_t>(source.vertex_count()));
}

void BM_match_iteration_budget(benchmark::State& state) {
  const SurfaceMesh source = make_icosphere(2, 1.0);
  const SurfaceMesh target = make_icosphere(2, 1.2);
  MatchParams params;
  params.max_iterations = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(match(source, target, params));
  }
}

} // namespace

BENCHMARK(BM_integrate_flow)->DenseRange(1, 3)->Complexity(benchmark::oNSquared);
BENCHMARK(BM_objective_gradient)->DenseRange(1, 2)->Complexity(benchmark::oNSquared);
BENCHMARK(BM_match_iteration_budget)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
