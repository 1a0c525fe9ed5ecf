#include "hemrt/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace hemrt {

namespace {

std::int64_t round_down(std::int64_t v, std::int64_t step) { return v / step * step; }
std::int64_t round_up(std::int64_t v, std::int64_t step) {
  return (v + step - 1) / step * step;
}

std::set<ClassId> classes_of(std::span<const SampleRef> pool) {
  std::set<ClassId> out;
  for (const auto& s : pool) out.insert(s->class_label);
  return out;
}

std::int64_t train_epochs(Learner& learner, std::span<const SampleRef> data, int epochs,
                          std::size_t batch_size, double learning_rate, Rng& rng) {
  if (data.empty() || epochs <= 0) return 0;
  std::vector<SampleRef> pool(data.begin(), data.end());
  for (int e = 0; e < epochs; ++e) {
    const auto batches = make_batches(pool, batch_size, rng);
    learner.train_epoch(batches, learning_rate);
  }
  return static_cast<std::int64_t>(pool.size()) * epochs;
}

}  // namespace

std::size_t ProfilerConfig::effective_batch(double rate) const noexcept {
  if (!scale_batch) return batch_size;
  const auto scaled = std::llround(static_cast<double>(batch_size) * rate);
  return static_cast<std::size_t>(std::max<long long>(1, scaled));
}

ProfilerConfig ProfilerConfig::exhaustive(int epochs, std::size_t batch_size,
                                          double learning_rate) {
  ProfilerConfig c;
  c.conf_samples = std::numeric_limits<std::size_t>::max();
  c.warmup_epochs = 0;
  c.profile_epochs = epochs;
  c.subsample = 1.0;
  c.warmup_subsample = 1.0;
  c.batch_size = batch_size;
  c.learning_rate = learning_rate;
  return c;
}

std::vector<Conf> build_search_space(const MemoryBudget& budget, std::int64_t task_size,
                                     std::int64_t step) {
  if (step < 1) throw std::invalid_argument("sizing step must be positive");
  if (budget.max_samples < step)
    throw std::invalid_argument(
        fmt::format("budget {} is below the sizing step {}", budget.max_samples, step));
  if (task_size < 1) throw std::invalid_argument("task must contain samples");
  const std::int64_t cap = round_down(budget.max_samples, step);
  const std::int64_t sb_max = std::min(round_up(task_size, step), cap);
  std::vector<Conf> space;
  for (std::int64_t sb = step; sb <= sb_max; sb += step)
    for (std::int64_t em = 0; sb + em <= cap; em += step) space.push_back({sb, em});
  return space;
}

std::vector<Conf> sample_confs(std::span<const Conf> space, std::size_t k, Rng& rng,
                               std::optional<Conf> reference) {
  if (k < 1) throw std::invalid_argument("must sample at least one conf");
  std::vector<Conf> all(space.begin(), space.end());
  std::sort(all.begin(), all.end());
  if (all.size() <= k) return all;

  std::vector<Conf> out;
  std::vector<Conf> rest;
  const bool has_ref =
      reference && std::binary_search(all.begin(), all.end(), *reference);
  for (const Conf& c : all)
    if (!has_ref || c != *reference) rest.push_back(c);
  const std::size_t draw = has_ref ? k - 1 : k;
  std::sample(rest.begin(), rest.end(), std::back_inserter(out), draw, rng);
  if (has_ref) out.push_back(*reference);
  std::sort(out.begin(), out.end());
  return out;
}

Conf first_task_reference(std::int64_t budget, std::int64_t task_size, std::int64_t step) {
  const std::int64_t half = budget / 2;
  const std::int64_t sb = std::max(step, round_down(std::min(task_size, half), step));
  std::int64_t em = round_down(half, step);
  if (sb + em > budget) em = std::max<std::int64_t>(0, round_down(budget - sb, step));
  return {sb, em};
}

Conf nearest_conf(std::span<const Conf> space, Conf prior) {
  if (space.empty()) throw std::invalid_argument("empty search space");
  auto dist = [&](const Conf& c) {
    return std::llabs(c.sb_size - prior.sb_size) + std::llabs(c.em_size - prior.em_size);
  };
  const Conf* best = &space.front();
  for (const Conf& c : space) {
    const auto dc = dist(c), db = dist(*best);
    if (dc < db || (dc == db && (c.total() < best->total() ||
                                 (c.total() == best->total() && c < *best))))
      best = &c;
  }
  return *best;
}

std::vector<SampleRef> conf_training_pool(const ProfileContext& ctx, Conf conf, Rng& rng) {
  const auto sb_n = std::min<std::size_t>(static_cast<std::size_t>(conf.sb_size),
                                          ctx.task_train.size());
  std::vector<SampleRef> pool(ctx.task_train.begin(),
                              ctx.task_train.begin() + static_cast<std::ptrdiff_t>(sb_n));
  auto old = masked_em_view(ctx.em, ctx.archive, conf.em_size, rng);
  pool.insert(pool.end(), old.begin(), old.end());
  return pool;
}

std::int64_t samples_in_use(const ProfileContext& ctx, Conf conf) {
  Rng scratch(0);
  const auto sb_n = std::min<std::int64_t>(conf.sb_size,
                                           static_cast<std::int64_t>(ctx.task_train.size()));
  return sb_n + static_cast<std::int64_t>(
                    masked_em_view(ctx.em, ctx.archive, conf.em_size, scratch).size());
}

Subsample subsample_with_coverage(std::span<const SampleRef> pool, double rate,
                                  int max_redraws, Rng& rng) {
  if (!(rate > 0.0) || rate > 1.0)
    throw std::invalid_argument("subsample rate must be in (0, 1]");
  Subsample out;
  if (pool.empty()) return out;
  const auto wanted = classes_of(pool);
  const auto m = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(rate * static_cast<double>(pool.size()) - 1e-9)));
  if (m >= pool.size()) {
    out.samples.assign(pool.begin(), pool.end());
    return out;
  }
  if (m >= wanted.size()) {
    for (int attempt = 0; attempt <= max_redraws; ++attempt) {
      out.samples.clear();
      std::sample(pool.begin(), pool.end(), std::back_inserter(out.samples), m, rng);
      out.redraws = attempt;
      if (classes_of(out.samples).size() == wanted.size()) return out;
    }
  }

  // One random sample per class, then a uniform fill from the remainder.
  out.stratified = true;
  out.samples.clear();
  std::vector<std::size_t> picked;
  for (ClassId c : wanted) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (pool[i]->class_label == c) idx.push_back(i);
    std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
    picked.push_back(idx[pick(rng)]);
  }
  std::sort(picked.begin(), picked.end());
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (!std::binary_search(picked.begin(), picked.end(), i)) rest.push_back(i);
  const std::size_t fill = m > picked.size() ? m - picked.size() : 0;
  std::sample(rest.begin(), rest.end(), std::back_inserter(picked), fill, rng);
  std::sort(picked.begin(), picked.end());
  for (std::size_t i : picked) out.samples.push_back(pool[i]);
  return out;
}

ReferenceCheckpoint make_reference_checkpoint(const ProfileContext& ctx, Conf reference,
                                              const ProfilerConfig& config,
                                              std::uint64_t seed) {
  ReferenceCheckpoint out;
  out.conf = reference;
  out.warmup_epochs = config.warmup_epochs;
  out.noisy = config.warmup_epochs <= 0;
  auto learner = ctx.live.clone();
  if (config.warmup_epochs > 0) {
    Rng rng(derive_seed(seed, seed_tag::kProfile, 0, 0));
    const auto pool = conf_training_pool(ctx, reference, rng);
    const auto data =
        subsample_with_coverage(pool, config.warmup_subsample, config.max_coverage_redraws, rng);
    out.sample_steps =
        train_epochs(*learner, data.samples, config.warmup_epochs,
                     config.effective_batch(config.warmup_subsample), config.learning_rate, rng);
  }
  out.checkpoint = learner->checkpoint();
  return out;
}

ConfEvaluation evaluate_conf(const ProfileContext& ctx, const ReferenceCheckpoint& reference,
                             Conf conf, const ProfilerConfig& config, std::uint64_t seed,
                             EnergyLedger& ledger) {
  ConfEvaluation out;
  Rng rng(derive_seed(seed, seed_tag::kProfile, static_cast<std::uint64_t>(conf.sb_size) + 1,
                      static_cast<std::uint64_t>(conf.em_size) + 1));
  const auto pool = conf_training_pool(ctx, conf, rng);
  if (pool.empty()) throw std::invalid_argument("conf " + to_string(conf) + " has no data");

  auto learner = ctx.live.clone();
  learner->restore(reference.checkpoint);
  out.data = subsample_with_coverage(pool, config.subsample, config.max_coverage_redraws, rng);
  out.sample_steps =
      train_epochs(*learner, out.data.samples, config.profile_epochs,
                   config.effective_batch(config.subsample), config.learning_rate, rng);
  charge_profiling(ctx.cost, out.sample_steps, static_cast<std::int64_t>(pool.size()), ledger);

  out.record.conf = conf;
  out.record.accuracy_estimate =
      ctx.probe_set.empty() ? 0.0 : learner->evaluate(ctx.probe_set).average;
  out.record.energy_estimate =
      ctx.cost.training_energy(static_cast<std::int64_t>(pool.size()), ctx.full_epochs);
  out.record.epoch_measured = std::max(0, reference.warmup_epochs) + config.profile_epochs;
  return out;
}

ProfileResult profile_task(const ProfileContext& ctx, const MemoryBudget& budget,
                           std::int64_t step, Conf reference, const ProfilerConfig& config,
                           std::uint64_t seed, EnergyLedger& ledger) {
  ProfileResult out;
  out.space = build_search_space(budget, static_cast<std::int64_t>(ctx.task_train.size()), step);
  out.reference = std::binary_search(out.space.begin(), out.space.end(), reference)
                      ? reference
                      : nearest_conf(out.space, reference);
  Rng rng(derive_seed(seed, seed_tag::kProfile, 1'000'003, 0));
  out.sampled = sample_confs(out.space, config.conf_samples, rng, out.reference);

  const auto ref = make_reference_checkpoint(ctx, out.reference, config, seed);
  out.warmup_sample_steps = ref.sample_steps;
  if (ref.sample_steps > 0) {
    Rng view_rng(0);
    const auto resident =
        static_cast<std::int64_t>(conf_training_pool(ctx, out.reference, view_rng).size());
    charge_profiling(ctx.cost, ref.sample_steps, resident, ledger);
  }
  if (ref.noisy) out.warnings.push_back("reference checkpoint taken without warmup");

  for (const Conf& conf : out.sampled) {
    auto eval = evaluate_conf(ctx, ref, conf, config, seed, ledger);
    out.eval_sample_steps += eval.sample_steps;
    if (eval.data.stratified)
      out.warnings.push_back(fmt::format("conf {}: random subsample missed a class after {} "
                                         "redraws, used per-class fill",
                                         to_string(conf), eval.data.redraws));
    out.records.push_back(eval.record);
  }
  return out;
}

}  // namespace hemrt
