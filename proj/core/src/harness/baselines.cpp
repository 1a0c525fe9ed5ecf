#include "hemrt/harness/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace hemrt::harness {

namespace {

std::int64_t round_down(std::int64_t v, std::int64_t step) { return v / step * step; }

ProfileRecord record_at_task(const GridRun& run, int task_id) {
  ProfileRecord r;
  r.conf = run.conf;
  const auto& row = run.report.tasks.at(static_cast<std::size_t>(task_id - 1)).accuracy_row;
  r.accuracy_estimate =
      row.empty() ? 0.0 : std::accumulate(row.begin(), row.end(), 0.0) / row.size();
  for (const auto& e : run.report.epochs)
    if (e.task_id == task_id) r.energy_estimate = e.joules_cum;
  r.epoch_measured = task_id;
  return r;
}

ProfileRecord record_final(const GridRun& run) {
  ProfileRecord r;
  r.conf = run.conf;
  r.accuracy_estimate = run.report.final_accuracy;
  r.energy_estimate = run.report.ledger.total();
  return r;
}

std::size_t index_of(const std::vector<GridRun>& runs, Conf conf) {
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (runs[i].conf == conf) return i;
  throw std::logic_error("selected conf missing from grid");
}

}  // namespace

std::string_view to_string(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::Adaptive: return "adaptive";
    case StrategyKind::CarmStatic: return "carm-static";
    case StrategyKind::BestStatic: return "best-static";
    case StrategyKind::BestHistory: return "best-history";
    case StrategyKind::Heuristic: return "heuristic";
  }
  return "?";
}

StrategyKind parse_strategy(std::string_view text) {
  for (auto k : {StrategyKind::Adaptive, StrategyKind::CarmStatic, StrategyKind::BestStatic,
                 StrategyKind::BestHistory, StrategyKind::Heuristic})
    if (to_string(k) == text) return k;
  throw std::invalid_argument("unknown strategy '" + std::string(text) + "'");
}

Conf carm_static_conf(const PolicyInput& in) {
  return first_task_reference(in.budget, in.task_size, in.step);
}

Conf heuristic_conf(const PolicyInput& in, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("heuristic fraction must be in (0, 1]");
  const double allotted = fraction * static_cast<double>(in.budget);
  const double t = in.task_id;
  std::int64_t sb = round_down(static_cast<std::int64_t>(allotted / t), in.step);
  sb = std::clamp(sb, in.step, round_down(in.budget, in.step));
  std::int64_t em = round_down(static_cast<std::int64_t>(allotted * (t - 1) / t), in.step);
  em = std::clamp<std::int64_t>(em, 0, round_down(in.budget - sb, in.step));
  return {sb, em};
}

std::unique_ptr<ConfPolicy> make_adaptive(const RunConfig& config) {
  ProfilerConfig p = config.profiler;
  p.batch_size = config.batch_size;
  p.learning_rate = config.learning_rate;
  return std::make_unique<ProfilingPolicy>(p, config.cutline, config.mode);
}

std::unique_ptr<ConfPolicy> make_carm_static() {
  return std::make_unique<StaticPolicy>("carm-static", carm_static_conf);
}

std::unique_ptr<ConfPolicy> make_heuristic(double fraction) {
  return std::make_unique<StaticPolicy>(
      "heuristic-" + std::to_string(static_cast<int>(fraction * 100 + 0.5)),
      [fraction](const PolicyInput& in) { return heuristic_conf(in, fraction); });
}

BestStaticResult best_static(const TaskStream& stream, const RunConfig& config) {
  if (stream.tasks.empty()) throw std::invalid_argument("empty task stream");
  const auto task_size = static_cast<std::int64_t>(
      split_probe(stream.tasks.front(), config.probe_fraction, config.seed).first.size());
  const auto space = build_search_space({config.budget, 0}, task_size, config.step);

  BestStaticResult out;
  for (const Conf& conf : space) {
    auto policy = make_schedule_policy("static-" + to_string(conf), {conf});
    out.runs.push_back({conf, run_stream(stream, config, *policy)});
  }

  std::set<ClassId> seen;
  for (const auto& t : stream.tasks) seen.insert(t.class_set.begin(), t.class_set.end());
  std::vector<ProfileRecord> finals;
  for (const auto& r : out.runs) finals.push_back(record_final(r));
  out.winner = select(finals, config.cutline, config.mode, seen.size()).record.conf;
  out.winner_index = index_of(out.runs, out.winner);

  const int half = (static_cast<int>(stream.tasks.size()) + 1) / 2;
  std::set<ClassId> seen_half;
  for (int t = 0; t < half; ++t)
    seen_half.insert(stream.tasks[static_cast<std::size_t>(t)].class_set.begin(),
                     stream.tasks[static_cast<std::size_t>(t)].class_set.end());
  std::vector<ProfileRecord> halves;
  for (const auto& r : out.runs) halves.push_back(record_at_task(r, half));
  out.half_winner = select(halves, config.cutline, config.mode, seen_half.size()).record.conf;
  return out;
}

RunReport best_history(const TaskStream& stream, const RunConfig& config,
                       const BestStaticResult& grid) {
  const std::size_t half = (stream.tasks.size() + 1) / 2;
  std::vector<Conf> confs(half, grid.winner);
  confs.push_back(grid.half_winner);
  auto policy = make_schedule_policy("best-history", confs);
  return run_stream(stream, config, *policy);
}

RunReport run_strategy(StrategyKind kind, const TaskStream& stream, const RunConfig& config,
                       double heuristic_fraction) {
  switch (kind) {
    case StrategyKind::Adaptive: {
      auto p = make_adaptive(config);
      return run_stream(stream, config, *p);
    }
    case StrategyKind::CarmStatic: {
      auto p = make_carm_static();
      return run_stream(stream, config, *p);
    }
    case StrategyKind::Heuristic: {
      auto p = make_heuristic(heuristic_fraction);
      return run_stream(stream, config, *p);
    }
    case StrategyKind::BestStatic: {
      auto grid = best_static(stream, config);
      auto report = std::move(grid.runs[grid.winner_index].report);
      report.strategy = "best-static";
      return report;
    }
    case StrategyKind::BestHistory: {
      const auto grid = best_static(stream, config);
      return best_history(stream, config, grid);
    }
  }
  throw std::logic_error("unhandled strategy");
}

}  // namespace hemrt::harness
