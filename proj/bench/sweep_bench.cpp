// Serial reference (threads = 1) against the OpenMP fan-out for the corpus
// kernels. Arg(0) is the thread count; 0 means omp_get_max_threads().

#include <benchmark/benchmark.h>

#include "opm/analysis.hpp"
#include "opm/generator.hpp"
#include "opm/parallel.hpp"
#include "opm/sweep.hpp"

namespace {

using namespace opm;

const Ratio kAlpha = Ratio::Of(1, 100);

const std::vector<Instance>& Corpus() {
  static const auto corpus = GenerateCorpus(64, kAlpha, 7);
  return corpus;
}

int Threads(const benchmark::State& state) {
  return state.range(0) == 0 ? DefaultThreads() : static_cast<int>(state.range(0));
}

std::vector<std::uint64_t> Seeds(std::size_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

void BM_AuditSweep(benchmark::State& state) {
  SweepConfig cfg;
  cfg.alpha = kAlpha;
  cfg.seeds = Seeds(8);
  cfg.threads = Threads(state);
  for (auto _ : state) benchmark::DoNotOptimize(RunAuditSweep(Corpus(), cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(Corpus().size() * cfg.seeds.size()));
  state.counters["threads"] = cfg.threads;
}

void BM_IcSweep(benchmark::State& state) {
  SweepConfig cfg;
  cfg.alpha = kAlpha;
  cfg.seeds = Seeds(4);
  cfg.threads = Threads(state);
  const std::vector<Instance> part(Corpus().begin(), Corpus().begin() + 16);
  for (auto _ : state) benchmark::DoNotOptimize(RunIcSweep(part, cfg, 8, 3));
  state.counters["threads"] = cfg.threads;
}

void BM_EventFrequency(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.alpha = kAlpha;
  cfg.seeds = Seeds(8);
  cfg.threads = Threads(state);
  for (auto _ : state) benchmark::DoNotOptimize(RunEventFrequency(Corpus(), cfg));
  state.counters["threads"] = cfg.threads;
}

void BM_RatioExperiment(benchmark::State& state) {
  static const auto family = GenerateFamily(8, Ratio::Of(1, 80), 3);
  ExperimentConfig cfg;
  cfg.alpha = Ratio::Of(1, 80);
  cfg.seeds = Seeds(32);
  cfg.threads = Threads(state);
  for (auto _ : state) benchmark::DoNotOptimize(RunRatioExperiment(family, cfg));
  state.counters["threads"] = cfg.threads;
}

}  // namespace

BENCHMARK(BM_AuditSweep)->Arg(1)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_IcSweep)->Arg(1)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EventFrequency)->Arg(1)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RatioExperiment)->Arg(1)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
