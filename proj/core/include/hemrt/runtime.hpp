#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hemrt/cost_model.hpp"
#include "hemrt/domain.hpp"
#include "hemrt/learner.hpp"
#include "hemrt/memory_hierarchy.hpp"
#include "hemrt/profiler.hpp"
#include "hemrt/selector.hpp"
#include "hemrt/swap_controller.hpp"
#include "hemrt/swap_engine.hpp"

namespace hemrt {

// Training tasks plus a disjoint test split per task.
struct TaskStream {
  std::vector<Task> tasks;
  std::vector<std::vector<SampleRef>> test_sets;
  StreamKind kind = StreamKind::ClassIncremental;
};

// Live budget update, applied at the end of global epoch `effective_epoch`.
struct BudgetChange {
  int effective_epoch = 0;
  std::int64_t new_budget = 0;
};

struct RunConfig {
  int epochs = 20;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  std::int64_t budget = 5000;
  std::int64_t step = kDefaultSizingStep;
  double cutline = kDefaultCutline;
  SelectMode mode = SelectMode::HighestUtility;
  // Share of each task's samples held out as the profiling probe set.
  double probe_fraction = 0.10;
  ProfilerConfig profiler;
  CostModel cost;
  double bandwidth_bytes_per_s = 100e6;
  std::vector<LoadPoint> external_load;
  std::vector<BudgetChange> budget_schedule;
  double initial_swap_ratio = 1.0;
  bool adaptive_swap = true;
  AimdParams aimd;
  IoThresholds thresholds;
  std::optional<std::int64_t> archive_capacity;
  MlpConfig learner;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct PolicyInput {
  int task_id = 1;
  int n_tasks = 1;
  std::int64_t budget = 0;
  std::int64_t step = kDefaultSizingStep;
  std::int64_t task_size = 0;
  std::optional<Conf> previous;
  const ProfileContext* profile = nullptr;
  std::uint64_t seed = 0;
};

struct TaskChoice {
  Conf conf;
  std::optional<ProfileResult> profile;
  std::optional<Selection> selection;
};

// Decides each task's SB/EM sizes.
class ConfPolicy {
 public:
  virtual ~ConfPolicy() = default;
  [[nodiscard]] virtual std::string name() const = 0;
  virtual TaskChoice choose(const PolicyInput& input, EnergyLedger& ledger) = 0;
};

// Profile -> cutline -> HU/LE each task. An optional override replaces the
// selector's pick (profiling still runs and is billed).
class ProfilingPolicy final : public ConfPolicy {
 public:
  using Override = std::function<Conf(const PolicyInput&, const ProfileResult&)>;
  ProfilingPolicy(ProfilerConfig profiler, double cutline, SelectMode mode,
                  Override forced = {});
  [[nodiscard]] std::string name() const override;
  TaskChoice choose(const PolicyInput& input, EnergyLedger& ledger) override;

 private:
  ProfilerConfig profiler_;
  double cutline_;
  SelectMode mode_;
  Override forced_;
};

// Conf from a fixed rule, no profiling.
class StaticPolicy final : public ConfPolicy {
 public:
  using Rule = std::function<Conf(const PolicyInput&)>;
  StaticPolicy(std::string name, Rule rule);
  [[nodiscard]] std::string name() const override { return name_; }
  TaskChoice choose(const PolicyInput& input, EnergyLedger& ledger) override;

 private:
  std::string name_;
  Rule rule_;
};

// Fixed conf per task id (1-based); the last entry repeats.
std::unique_ptr<ConfPolicy> make_schedule_policy(std::string name, std::vector<Conf> confs);

// Largest-total conf on the step grid with sb >= step and sb + em <= budget;
// ties go to the conf closest to `current`.
Conf largest_feasible_conf(std::int64_t budget, std::int64_t step, Conf current);

enum class Phase { Profile, Train, Probe, Estimate, Adapt, Flush };
std::string_view to_string(Phase phase) noexcept;

struct Transition {
  int task_id = 0;
  int global_epoch = 0;
  Phase phase = Phase::Train;
  std::string detail;
};

struct EpochRecord {
  int task_id = 0;
  int epoch = 0;         // within the task, 1-based
  int global_epoch = 0;  // across the run, 1-based
  double loss = 0.0;
  double swap_ratio = 0.0;
  IoState io_state = IoState::Stable;
  std::int64_t em_size = 0;
  std::int64_t sb_size = 0;
  double joules_cum = 0.0;
  std::int64_t budget = 0;
  std::int64_t samples_trained = 0;
  std::optional<double> completion_rate;
  SwapCounters swaps;
  double sim_time_s = 0.0;
};

struct TaskRecord {
  int task_id = 0;
  Conf conf;
  Conf final_conf;  // after any mid-task budget adaptation
  std::optional<Selection> selection;
  std::vector<ProfileRecord> profile_records;
  std::int64_t profile_sample_steps = 0;
  bool deferred_profiling = false;
  std::vector<double> accuracy_row;  // accuracy on tasks 1..task_id after this task
};

struct RunReport {
  std::string strategy;
  std::uint64_t seed = 0;
  double final_accuracy = 0.0;
  std::size_t classes_seen = 0;
  EnergyLedger ledger;
  std::vector<TaskRecord> tasks;
  std::vector<EpochRecord> epochs;
  std::vector<ControllerDecision> decisions;
  std::vector<Transition> transitions;
  std::vector<std::string> warnings;
  SwapCounters swaps;
  bool aborted = false;
  std::string abort_reason;

  // Final accuracy gain over random guessing per joule of total energy.
  [[nodiscard]] double utility() const;
};

// Runs the full Profile / train / Probe / Estimate / Adapt / flush loop.
// Learner divergence ends the run early with `aborted` set.
RunReport run_stream(const TaskStream& stream, const RunConfig& config, ConfPolicy& policy,
                     std::unique_ptr<Learner> learner = nullptr);

// Holds out round(fraction * n_c) samples of each class (at least one when
// the class has two or more). Returns {train, probe}, both in task order.
std::pair<std::vector<SampleRef>, std::vector<SampleRef>> split_probe(
    const Task& task, double fraction, std::uint64_t seed);

}  // namespace hemrt
