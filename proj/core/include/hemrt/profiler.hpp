#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hemrt/cost_model.hpp"
#include "hemrt/domain.hpp"
#include "hemrt/learner.hpp"
#include "hemrt/memory_hierarchy.hpp"
#include "hemrt/random.hpp"

namespace hemrt {

struct ProfilerConfig {
  std::size_t conf_samples = 14;
  int warmup_epochs = 10;
  int profile_epochs = 5;
  double subsample = 0.05;
  // Data fraction used while warming up the reference checkpoint.
  double warmup_subsample = 0.05;
  int max_coverage_redraws = 20;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  // Shrink the batch by the subsample rate so a profiling epoch takes about
  // as many optimizer steps as a full epoch.
  bool scale_batch = true;

  [[nodiscard]] std::size_t effective_batch(double rate) const noexcept;

  // Every conf, every sample, `epochs` epochs from the live model.
  static ProfilerConfig exhaustive(int epochs, std::size_t batch_size, double learning_rate);
};

// All (sb, em) on the step grid with step <= sb <= min(task rounded up,
// budget), em >= 0 and sb + em <= budget. Throws if budget < step.
std::vector<Conf> build_search_space(const MemoryBudget& budget, std::int64_t task_size,
                                     std::int64_t step);

// k confs drawn uniformly without replacement, always including `reference`
// when it is in the space. Returned in ascending conf order.
std::vector<Conf> sample_confs(std::span<const Conf> space, std::size_t k, Rng& rng,
                               std::optional<Conf> reference = std::nullopt);

// First-task warmup conf: (min(task, budget/2), budget/2) snapped down to
// the step grid, at least one step of SB.
Conf first_task_reference(std::int64_t budget, std::int64_t task_size, std::int64_t step);
// Conf in `space` closest (L1) to `prior`; ties go to the smaller total, then
// the smaller conf.
Conf nearest_conf(std::span<const Conf> space, Conf prior);

// Read-only view of everything profiling needs. Nothing here is mutated.
struct ProfileContext {
  const Learner& live;
  std::span<const SampleRef> task_train;
  const EpisodicMemory& em;
  const StorageArchive& archive;
  std::span<const SampleRef> probe_set;
  std::size_t classes_seen = 0;
  const CostModel& cost;
  int full_epochs = 20;
};

// Training data a conf would see: the first sb task samples plus a
// class-balanced view of em old samples.
std::vector<SampleRef> conf_training_pool(const ProfileContext& ctx, Conf conf, Rng& rng);
std::int64_t samples_in_use(const ProfileContext& ctx, Conf conf);

struct Subsample {
  std::vector<SampleRef> samples;
  int redraws = 0;
  bool stratified = false;  // random draws never covered every class
};

// Random subset of ceil(rate * n) samples containing every class of `pool`.
// Redraws up to `max_redraws` times, then falls back to one sample per class
// plus a random fill.
Subsample subsample_with_coverage(std::span<const SampleRef> pool, double rate,
                                  int max_redraws, Rng& rng);

struct ReferenceCheckpoint {
  Checkpoint checkpoint;
  Conf conf;
  int warmup_epochs = 0;
  std::int64_t sample_steps = 0;
  bool noisy = false;  // no warmup: loss is still in its spiky phase
};

ReferenceCheckpoint make_reference_checkpoint(const ProfileContext& ctx, Conf reference,
                                              const ProfilerConfig& config,
                                              std::uint64_t seed);

struct ConfEvaluation {
  ProfileRecord record;
  std::int64_t sample_steps = 0;
  Subsample data;
};

// Restores the checkpoint into a private learner, trains on the conf's
// subsample, reads probe accuracy, and extrapolates full-task energy with the
// cost model. Training work is billed to `ledger` as profiling overhead.
ConfEvaluation evaluate_conf(const ProfileContext& ctx, const ReferenceCheckpoint& reference,
                             Conf conf, const ProfilerConfig& config, std::uint64_t seed,
                             EnergyLedger& ledger);

struct ProfileResult {
  std::vector<Conf> space;
  std::vector<Conf> sampled;
  Conf reference;
  std::vector<ProfileRecord> records;
  std::int64_t warmup_sample_steps = 0;
  std::int64_t eval_sample_steps = 0;
  std::vector<std::string> warnings;
};

// Whole Profile phase for one task.
ProfileResult profile_task(const ProfileContext& ctx, const MemoryBudget& budget,
                           std::int64_t step, Conf reference, const ProfilerConfig& config,
                           std::uint64_t seed, EnergyLedger& ledger);

}  // namespace hemrt
