#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "hemrt/learner.hpp"
#include "hemrt/memory_hierarchy.hpp"
#include "hemrt/selector.hpp"
#include "hemrt/swap_engine.hpp"

namespace {

using namespace hemrt;

void BM_TrainEpoch(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const auto task = hemrt::testing::make_task(1, hemrt::testing::class_range(0, 10), n / 10, 0, 32);
  StreamBuffer sb(n);
  StorageArchive archive;
  buffer_stream(task, sb, archive);
  EpisodicMemory em(0);
  MlpClassifier mlp(MlpConfig{});
  mlp.add_classes(std::vector<ClassId>(task.class_set.begin(), task.class_set.end()));
  Rng rng(1);
  const auto epoch = compose_epoch_batches(sb, em, 16, rng);
  for (auto _ : state) benchmark::DoNotOptimize(mlp.train_epoch(epoch.batches, 0.01));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TrainEpoch)->Arg(500)->Arg(2000);

void BM_Select(benchmark::State& state) {
  Rng rng(2);
  const auto recs = oracle::random_records(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(select(recs, 0.2, SelectMode::HighestUtility, 100));
}
BENCHMARK(BM_Select)->Arg(14)->Arg(1000);

void BM_Rebalance(benchmark::State& state) {
  const auto old_task = hemrt::testing::make_task(1, hemrt::testing::class_range(0, 50), 100);
  StreamBuffer sb(static_cast<std::int64_t>(old_task.samples.size()));
  StorageArchive archive;
  buffer_stream(old_task, sb, archive);
  EpisodicMemory em(2000);
  Rng rng(3);
  flush(old_task, sb, em, archive, rng);
  bool big = false;
  for (auto _ : state) {
    big = !big;
    benchmark::DoNotOptimize(resize(em, big ? 4000 : 1000, archive, rng));
  }
}
BENCHMARK(BM_Rebalance);

void BM_ChannelSchedule(benchmark::State& state) {
  IoChannel ch(10e6);
  ch.set_external_load({{0.0, 2e6}, {5.0, 8e6}, {10.0, 0.0}});
  double now = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ch.schedule(now, 6144.0));
    now += 1e-4;
  }
}
BENCHMARK(BM_ChannelSchedule);

}  // namespace

BENCHMARK_MAIN();
