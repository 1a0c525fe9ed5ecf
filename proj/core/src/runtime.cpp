#include "hemrt/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace hemrt {

namespace {

std::int64_t round_down(std::int64_t v, std::int64_t step) { return v / step * step; }

std::int64_t l1(Conf a, Conf b) {
  return std::llabs(a.sb_size - b.sb_size) + std::llabs(a.em_size - b.em_size);
}

}  // namespace

void RunConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
  if (step < 1) throw std::invalid_argument("sizing step must be positive");
  if (budget < step) throw std::invalid_argument("budget must be at least one sizing step");
  if (!(cutline > 0.0) || cutline > 1.0) throw std::invalid_argument("cutline must be in (0, 1]");
  if (!(probe_fraction >= 0.0) || probe_fraction >= 1.0)
    throw std::invalid_argument("probe fraction must be in [0, 1)");
  if (!(bandwidth_bytes_per_s > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (initial_swap_ratio < 0.0 || initial_swap_ratio > 1.0)
    throw std::invalid_argument("swap ratio must be in [0, 1]");
  for (const auto& c : budget_schedule)
    if (c.new_budget < step)
      throw std::invalid_argument("scheduled budget below one sizing step");
  cost.validate();
}

double RunReport::utility() const {
  const double joules = ledger.total();
  if (!(joules > 0.0)) return 0.0;
  return accuracy_gain(final_accuracy, classes_seen) / joules;
}

std::string_view to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::Profile: return "profile";
    case Phase::Train: return "train";
    case Phase::Probe: return "probe";
    case Phase::Estimate: return "estimate";
    case Phase::Adapt: return "adapt";
    case Phase::Flush: return "flush";
  }
  return "?";
}

// ---- policies ----------------------------------------------------------------

ProfilingPolicy::ProfilingPolicy(ProfilerConfig profiler, double cutline, SelectMode mode,
                                 Override forced)
    : profiler_(profiler), cutline_(cutline), mode_(mode), forced_(std::move(forced)) {}

std::string ProfilingPolicy::name() const {
  return forced_ ? "adaptive-forced" : fmt::format("adaptive-{}", to_string(mode_));
}

TaskChoice ProfilingPolicy::choose(const PolicyInput& in, EnergyLedger& ledger) {
  if (in.profile == nullptr) throw std::logic_error("profiling policy needs a profile context");
  const Conf reference =
      in.previous ? *in.previous : first_task_reference(in.budget, in.task_size, in.step);
  TaskChoice out;
  out.profile = profile_task(*in.profile, MemoryBudget{in.budget, 0}, in.step, reference,
                             profiler_, in.seed, ledger);
  out.selection = select(out.profile->records, cutline_, mode_, in.profile->classes_seen);
  out.conf = forced_ ? forced_(in, *out.profile) : out.selection->record.conf;
  return out;
}

StaticPolicy::StaticPolicy(std::string name, Rule rule)
    : name_(std::move(name)), rule_(std::move(rule)) {}

TaskChoice StaticPolicy::choose(const PolicyInput& in, EnergyLedger&) {
  TaskChoice out;
  out.conf = rule_(in);
  return out;
}

std::unique_ptr<ConfPolicy> make_schedule_policy(std::string name, std::vector<Conf> confs) {
  if (confs.empty()) throw std::invalid_argument("schedule needs at least one conf");
  return std::make_unique<StaticPolicy>(std::move(name), [confs](const PolicyInput& in) {
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(in.task_id - 1),
                                         confs.size() - 1);
    return confs[i];
  });
}

Conf largest_feasible_conf(std::int64_t budget, std::int64_t step, Conf current) {
  const std::int64_t cap = round_down(budget, step);
  if (cap < step) throw std::invalid_argument("budget below one sizing step");
  Conf best{step, cap - step};
  for (std::int64_t sb = step; sb <= cap; sb += step) {
    const Conf c{sb, cap - sb};
    if (l1(c, current) < l1(best, current)) best = c;
  }
  return best;
}

std::pair<std::vector<SampleRef>, std::vector<SampleRef>> split_probe(const Task& task,
                                                                     double fraction,
                                                                     std::uint64_t seed) {
  std::map<ClassId, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < task.samples.size(); ++i)
    by_class[task.samples[i]->class_label].push_back(i);
  Rng rng(derive_seed(seed, seed_tag::kSplit, static_cast<std::uint64_t>(task.task_id)));
  std::vector<bool> held(task.samples.size(), false);
  if (fraction > 0.0) {
    for (auto& [c, idx] : by_class) {
      auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
      if (k == 0 && idx.size() >= 2) k = 1;
      k = std::min(k, idx.size() - 1);
      std::vector<std::size_t> pick;
      std::sample(idx.begin(), idx.end(), std::back_inserter(pick), k, rng);
      for (std::size_t i : pick) held[i] = true;
    }
  }
  std::pair<std::vector<SampleRef>, std::vector<SampleRef>> out;
  for (std::size_t i = 0; i < task.samples.size(); ++i)
    (held[i] ? out.second : out.first).push_back(task.samples[i]);
  return out;
}

// ---- run loop ---------------------------------------------------------------

namespace {

class Runner {
 public:
  Runner(const TaskStream& stream, const RunConfig& config, ConfPolicy& policy,
         std::unique_ptr<Learner> learner)
      : stream_(stream),
        cfg_(config),
        policy_(policy),
        learner_(std::move(learner)),
        archive_(config.archive_capacity),
        swaps_(IoChannel(config.bandwidth_bytes_per_s)),
        controller_(config.initial_swap_ratio, config.adaptive_swap, config.aimd,
                    config.thresholds),
        budget_(config.budget) {
    swaps_.channel().set_external_load(config.external_load);
    schedule_ = config.budget_schedule;
    std::stable_sort(schedule_.begin(), schedule_.end(),
                     [](const BudgetChange& a, const BudgetChange& b) {
                       return a.effective_epoch < b.effective_epoch;
                     });
    if (!learner_) {
      MlpConfig mc = config.learner;
      mc.seed = derive_seed(config.seed, seed_tag::kLearner);
      learner_ = std::make_unique<MlpClassifier>(mc);
    }
    report_.strategy = policy.name();
    report_.seed = config.seed;
  }

  RunReport run() {
    const int n_tasks = static_cast<int>(stream_.tasks.size());
    try {
      for (int t = 0; t < n_tasks; ++t) run_task(t, n_tasks);
    } catch (const LearnerDivergence& e) {
      report_.aborted = true;
      report_.abort_reason = e.what();
    }
    report_.decisions = controller_.decisions();
    report_.swaps = swaps_.counters();
    report_.classes_seen = seen_.size();
    report_.final_accuracy = final_accuracy();
    return std::move(report_);
  }

 private:
  void log(Phase phase, std::string detail = {}) {
    report_.transitions.push_back({task_id_, global_epoch_, phase, std::move(detail)});
  }

  double final_accuracy() const {
    std::vector<SampleRef> all;
    const std::size_t done = report_.tasks.size();
    for (std::size_t j = 0; j < done && j < stream_.test_sets.size(); ++j)
      all.insert(all.end(), stream_.test_sets[j].begin(), stream_.test_sets[j].end());
    if (all.empty()) return 0.0;
    return learner_->evaluate(all).average;
  }

  void run_task(int t, int n_tasks) {
    const Task& raw = stream_.tasks[static_cast<std::size_t>(t)];
    task_id_ = raw.task_id;
    auto [train, probe] = split_probe(raw, cfg_.probe_fraction, cfg_.seed);
    Task task{raw.task_id, std::move(train), raw.class_set};
    probe_set_.insert(probe_set_.end(), probe.begin(), probe.end());
    for (ClassId c : task.class_set) seen_.insert(c);

    std::vector<ClassId> labels(task.class_set.begin(), task.class_set.end());
    learner_->add_classes(labels);

    // Profile
    TaskRecord rec;
    rec.task_id = task.task_id;
    rec.deferred_profiling = deferred_profiling_;
    deferred_profiling_ = false;
    ProfileContext ctx{*learner_,  task.samples, em_,        archive_,
                       probe_set_, seen_.size(), cfg_.cost, cfg_.epochs};
    PolicyInput in;
    in.task_id = task.task_id;
    in.n_tasks = n_tasks;
    in.budget = budget_;
    in.step = cfg_.step;
    in.task_size = static_cast<std::int64_t>(task.samples.size());
    in.previous = previous_;
    in.profile = &ctx;
    in.seed = derive_seed(cfg_.seed, seed_tag::kProfile, static_cast<std::uint64_t>(t));
    log(Phase::Profile, policy_.name());
    TaskChoice choice = policy_.choose(in, report_.ledger);
    validate_conf(choice.conf, cfg_.step);
    if (choice.conf.total() > budget_)
      throw std::logic_error(fmt::format("policy chose {} over budget {}",
                                         to_string(choice.conf), budget_));
    if (choice.profile) {
      rec.profile_records = choice.profile->records;
      rec.profile_sample_steps =
          choice.profile->warmup_sample_steps + choice.profile->eval_sample_steps;
      for (const auto& w : choice.profile->warnings)
        report_.warnings.push_back(fmt::format("task {}: {}", task.task_id, w));
    }
    rec.selection = choice.selection;
    rec.conf = choice.conf;
    previous_ = choice.conf;
    apply_conf(choice.conf, static_cast<std::uint64_t>(t));

    buffer_stream(task, sb_, archive_);

    for (int e = 1; e <= cfg_.epochs; ++e) {
      ++global_epoch_;
      train_epoch(task, rec, e);
    }

    log(Phase::Flush);
    Rng flush_rng(derive_seed(cfg_.seed, seed_tag::kFlush, static_cast<std::uint64_t>(t)));
    flush(task, sb_, em_, archive_, flush_rng);

    rec.final_conf = current_;
    for (std::size_t j = 0; j <= static_cast<std::size_t>(t) && j < stream_.test_sets.size();
         ++j)
      rec.accuracy_row.push_back(learner_->evaluate(stream_.test_sets[j]).average);
    report_.tasks.push_back(std::move(rec));
  }

  void apply_conf(Conf conf, std::uint64_t salt) {
    Rng rng(derive_seed(cfg_.seed, seed_tag::kResize, salt,
                        static_cast<std::uint64_t>(global_epoch_)));
    resize(em_, conf.em_size, archive_, rng);
    resize(sb_, conf.sb_size);
    current_ = conf;
  }

  void train_epoch(const Task& task, TaskRecord& rec, int epoch) {
    const auto g = static_cast<std::uint64_t>(global_epoch_);
    log(Phase::Train);
    Rng batch_rng(derive_seed(cfg_.seed, seed_tag::kBatches, g));
    auto eb = compose_epoch_batches(sb_, em_, cfg_.batch_size, batch_rng);
    const auto n = static_cast<std::int64_t>(sb_.size() + eb.drawn_em.size());
    const double loss = learner_->train_epoch(eb.batches, cfg_.learning_rate);

    const double t0 = now_;
    now_ += cfg_.cost.epoch_seconds(n);
    Rng apply_rng(derive_seed(cfg_.seed, seed_tag::kSwapApply, g));
    swaps_.apply_completions(em_, archive_, now_, apply_rng);
    charge_epoch(cfg_.cost, n, swaps_.channel().busy_seconds(t0, now_), report_.ledger);

    // Probe
    empty_streak_ = swaps_.queue_empty() ? empty_streak_ + 1 : 0;
    const auto rate = swaps_.completion_rate(global_epoch_ - 1, global_epoch_ - 1);
    const IoState state = controller_.classify(rate, empty_streak_);
    std::vector<std::string> changes;
    if (controller_.adaptive() && state != IoState::Stable)
      changes.push_back(fmt::format("io:{}", to_string(state)));
    std::int64_t new_budget = budget_;
    while (next_change_ < schedule_.size() &&
           schedule_[next_change_].effective_epoch <= global_epoch_) {
      new_budget = schedule_[next_change_++].new_budget;
    }
    const bool budget_changed = new_budget != budget_;
    if (budget_changed)
      changes.push_back(new_budget < budget_ ? "budget:shrunk" : "budget:grown");
    log(Phase::Probe, fmt::format("{}", fmt::join(changes, ",")));

    if (!changes.empty()) {
      log(Phase::Estimate);
      std::string adapted;
      if (controller_.adaptive() && state != IoState::Stable) {
        if (auto d = controller_.react(global_epoch_, state))
          adapted += fmt::format("ratio {:.4f}->{:.4f};", d->old_ratio, d->new_ratio);
      }
      if (budget_changed) adapted += adapt_budget(new_budget, task, rec);
      log(Phase::Adapt, adapted);
    }

    if (controller_.advance_epoch() && !eb.drawn_em.empty()) {
      Rng issue_rng(derive_seed(cfg_.seed, seed_tag::kSwapIssue, g));
      swaps_.issue_swaps(eb.drawn_em, controller_.plan().percent_per_firing, issue_rng, now_,
                         global_epoch_);
    }

    EpochRecord er;
    er.task_id = task.task_id;
    er.epoch = epoch;
    er.global_epoch = global_epoch_;
    er.loss = loss;
    er.swap_ratio = controller_.ratio();
    er.io_state = state;
    er.em_size = current_.em_size;
    er.sb_size = current_.sb_size;
    er.joules_cum = report_.ledger.total();
    er.budget = budget_;
    er.samples_trained = n;
    er.completion_rate = rate;
    er.swaps = swaps_.counters();
    er.sim_time_s = now_;
    report_.epochs.push_back(er);
  }

  std::string adapt_budget(std::int64_t new_budget, const Task& task, TaskRecord& rec) {
    const bool shrunk = new_budget < budget_;
    budget_ = new_budget;
    if (!shrunk) {
      deferred_profiling_ = true;
      return "profiling deferred to next task;";
    }
    if (current_.total() <= budget_) return "usage within budget;";

    std::vector<ProfileRecord> feasible;
    for (const auto& r : rec.profile_records)
      if (r.conf.total() <= budget_) feasible.push_back(r);
    Conf next;
    if (!feasible.empty()) {
      next = select(feasible, cfg_.cutline, cfg_.mode, seen_.size()).record.conf;
    } else {
      next = largest_feasible_conf(budget_, cfg_.step, current_);
      report_.warnings.push_back(
          fmt::format("task {}: no profiled conf fits budget {}, using {}", task.task_id,
                      budget_, to_string(next)));
    }
    apply_conf(next, 0x5348524e);
    return fmt::format("resized to {};", to_string(next));
  }

  const TaskStream& stream_;
  const RunConfig& cfg_;
  ConfPolicy& policy_;
  std::unique_ptr<Learner> learner_;

  StreamBuffer sb_;
  EpisodicMemory em_;
  StorageArchive archive_;
  SwapEngine swaps_;
  SwapController controller_;

  std::int64_t budget_;
  std::vector<BudgetChange> schedule_;
  std::size_t next_change_ = 0;
  bool deferred_profiling_ = false;
  std::optional<Conf> previous_;
  Conf current_;
  std::vector<SampleRef> probe_set_;
  std::set<ClassId> seen_;

  int task_id_ = 0;
  int global_epoch_ = 0;
  int empty_streak_ = 0;
  double now_ = 0.0;
  RunReport report_;
};

}  // namespace

RunReport run_stream(const TaskStream& stream, const RunConfig& config, ConfPolicy& policy,
                     std::unique_ptr<Learner> learner) {
  config.validate();
  if (stream.tasks.empty()) throw std::invalid_argument("empty task stream");
  Runner runner(stream, config, policy, std::move(learner));
  return runner.run();
}

}  // namespace hemrt
