#include <benchmark/benchmark.h>

#include "spnsched/experiments.hpp"

namespace {

// Dependent-binary simplex instance, LyapOpt over a polytope: the costly case.
void BM_Replicate(benchmark::State& state, bool parallel) {
  const spn::Instance inst = spn::build_thm1_instance(4, 1.0, 1.0);
  const spn::ReplicationConfig rc{static_cast<std::size_t>(state.range(0)), 32, 1, 0, true};
  for (auto _ : state) {
    auto reps = parallel ? spn::replicate_parallel(inst.arrivals, inst.set, spn::PolicySpec::lyapopt(), rc)
                         : spn::replicate_serial(inst.arrivals, inst.set, spn::PolicySpec::lyapopt(), rc);
    benchmark::DoNotOptimize(reps.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rc.replications * rc.horizon));
}

void BM_MaxWeightFinite(benchmark::State& state, bool parallel) {
  spn::Rng rng = spn::make_stream(1, 0, spn::kScenarioSalt);
  const auto set = spn::sample_integer_set(8, 80, 1, 10, rng);
  const auto arrivals = spn::build_binomial_spec(spn::boundary_sample(spn::CapacityRegion(set), rng));
  const spn::ReplicationConfig rc{static_cast<std::size_t>(state.range(0)), 32, 1, 0, true};
  for (auto _ : state) {
    auto reps = parallel ? spn::replicate_parallel(arrivals, set, spn::PolicySpec::maxweight(), rc)
                         : spn::replicate_serial(arrivals, set, spn::PolicySpec::maxweight(), rc);
    benchmark::DoNotOptimize(reps.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rc.replications * rc.horizon));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Replicate, serial, false)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Replicate, parallel, true)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_MaxWeightFinite, serial, false)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_MaxWeightFinite, parallel, true)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
