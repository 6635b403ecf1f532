// Micro benchmarks for the hot paths: one ERP frontier, a full local search, one structured Newton step.

#include <benchmark/benchmark.h>

#include "barter/erp.hpp"
#include "barter/experiment.hpp"
#include "barter/generator.hpp"
#include "barter/ipm.hpp"
#include "barter/ser.hpp"

namespace {

void BM_FrontierExact(benchmark::State& state) {
  const auto inst = barter::cara_pair_instance();
  const auto dir = barter::direction(inst, 0, 1, 0, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(barter::pareto_frontier(inst, inst.endowments, dir));
  }
}
BENCHMARK(BM_FrontierExact);

void BM_SerBestImprove(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto inst = barter::generate_instance(n, n, 7, {0.4, 0.4, 0.4});
  barter::SearchConfig cfg;
  cfg.mode = barter::SearchMode::kBestImprove;
  cfg.objective = barter::Objective::kWelfare;
  std::int64_t erps = 0;
  for (auto _ : state) {
    auto res = barter::run_ser(inst, cfg);
    erps = res.log.erps_solved;
    benchmark::DoNotOptimize(res);
  }
  state.counters["erps"] = static_cast<double>(erps);
}
BENCHMARK(BM_SerBestImprove)->Arg(6)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

void BM_StructuredNewton(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto inst = barter::generate_instance(n, n, 11, {});
  const barter::IpmOptions opt;
  const auto pb = barter::IpmProblem::build(inst, opt);
  const auto st = barter::initial_state(pb);
  for (auto _ : state) {
    benchmark::DoNotOptimize(barter::newton_direction_structured(pb, st));
  }
}
BENCHMARK(BM_StructuredNewton)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
