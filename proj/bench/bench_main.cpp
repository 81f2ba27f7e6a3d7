// Serial reference vs OpenMP kernels on a seeded synthetic user.

#include <benchmark/benchmark.h>

#include "lmd/baseline.hpp"
#include "lmd/evaluation.hpp"
#include "lmd/measures.hpp"
#include "lmd/synth.hpp"

namespace {

const lmd::LoginHistory& history() {
  static const lmd::LoginHistory h = [] {
    lmd::SynthConfig cfg;
    cfg.user_count = 1;
    cfg.seed = 42;
    cfg.star.fanout_min = 10;
    cfg.star.fanout_max = 30;
    cfg.star.pool_min = 40;
    cfg.star.pool_max = 60;
    cfg.star_share = 1.0;
    cfg.chain_share = cfg.sprawl_share = 0.0;
    cfg.novel_rate = 0.05;
    return lmd::build_daily_graphs(lmd::generate_synthetic_corpus(cfg).events, {}).begin()->second;
  }();
  return h;
}

lmd::EvalConfig eval_config() {
  lmd::EvalConfig c;
  c.iters = 5;
  c.seed = 1;
  return c;
}

void BM_MeasureTablesSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(lmd::compute_measure_tables_serial(history().graphs()));
}

void BM_MeasureTablesParallel(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(lmd::compute_measure_tables(history().graphs(), {}, static_cast<int>(state.range(0))));
}

void BM_SearchSerial(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(lmd::search_models_serial(history(), lmd::CompressionKind::nmf, {2}, eval_config()));
}

void BM_SearchParallel(benchmark::State& state) {
  auto cfg = eval_config();
  cfg.workers = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(lmd::search_models(history(), lmd::CompressionKind::nmf, {2}, cfg));
}

void BM_DistanceMatrix(benchmark::State& state) {
  std::vector<lmd::GraphSummary> sums;
  for (const auto& g : history().graphs()) sums.push_back(lmd::summarize_graph(g));
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(workers == 0 ? lmd::distance_matrix_serial(sums) : lmd::distance_matrix(sums, workers));
}

}  // namespace

BENCHMARK(BM_MeasureTablesSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeasureTablesParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SearchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SearchParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DistanceMatrix)->Arg(0)->Arg(2)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
