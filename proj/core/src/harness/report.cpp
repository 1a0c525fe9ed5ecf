#include "hemrt/harness/report.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace hemrt::harness {

namespace {

using nlohmann::json;

json conf_json(Conf c) { return {{"sb", c.sb_size}, {"em", c.em_size}}; }

json energy_json(const EnergyLedger& ledger) {
  json j;
  for (std::size_t i = 0; i < kEnergyComponentCount; ++i) {
    const auto c = static_cast<EnergyComponent>(i);
    j[std::string(to_string(c))] = ledger.component(c);
  }
  j["total"] = ledger.total();
  j["training_total"] = ledger.training_total();
  j["wall_time_seconds"] = ledger.wall_time_seconds();
  return j;
}

}  // namespace

std::string summary_json(const RunReport& report, const RunConfig& config) {
  json j;
  j["format_version"] = kTraceFormatVersion;
  j["strategy"] = report.strategy;
  j["seed"] = report.seed;
  j["budget"] = config.budget;
  j["epochs"] = config.epochs;
  j["aborted"] = report.aborted;
  if (report.aborted) j["abort_reason"] = report.abort_reason;
  j["final_accuracy"] = report.final_accuracy;
  j["classes_seen"] = report.classes_seen;
  j["utility"] = report.utility();
  j["energy_joules"] = energy_json(report.ledger);
  j["swaps"] = {{"issued", report.swaps.issued},
                {"applied", report.swaps.applied},
                {"dropped", report.swaps.dropped},
                {"pending", report.swaps.pending}};
  json tasks = json::array();
  for (const auto& t : report.tasks) {
    json tj;
    tj["task_id"] = t.task_id;
    tj["conf"] = conf_json(t.conf);
    tj["final_conf"] = conf_json(t.final_conf);
    tj["accuracy_row"] = t.accuracy_row;
    tj["profiled_confs"] = t.profile_records.size();
    tj["profile_sample_steps"] = t.profile_sample_steps;
    tj["deferred_profiling"] = t.deferred_profiling;
    tasks.push_back(std::move(tj));
  }
  j["tasks"] = std::move(tasks);
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

std::string trace_csv(const RunReport& report) {
  std::string out(kTraceColumns);
  out += '\n';
  for (const auto& e : report.epochs)
    out += fmt::format("{},{},{:.9g},{:.6f},{},{},{},{:.9g}\n", e.task_id, e.epoch, e.loss,
                       e.swap_ratio, to_string(e.io_state), e.em_size, e.sb_size,
                       e.joules_cum);
  return out;
}

std::string events_jsonl(const RunReport& report, const RunConfig& config) {
  std::string out;
  auto line = [&](const json& j) { out += j.dump() + "\n"; };
  for (const auto& t : report.tasks) {
    for (const auto& r : t.profile_records)
      line({{"event", "profile"},
            {"task_id", t.task_id},
            {"conf", conf_json(r.conf)},
            {"accuracy_estimate", r.accuracy_estimate},
            {"energy_estimate", r.energy_estimate}});
    if (t.selection)
      line({{"event", "selection"},
            {"task_id", t.task_id},
            {"mode", std::string(to_string(config.mode))},
            {"cutline", config.cutline},
            {"chosen_conf", conf_json(t.conf)},
            {"utility", t.selection->utility}});
  }
  for (const auto& d : report.decisions)
    line({{"event", "controller"},
          {"epoch", d.epoch},
          {"state", std::string(to_string(d.state))},
          {"old_ratio", d.old_ratio},
          {"new_ratio", d.new_ratio},
          {"interval", d.interval_epochs},
          {"percent", d.percent_per_firing}});
  for (const auto& w : report.warnings) line({{"event", "warning"}, {"message", w}});
  return out;
}

std::string scatter_csv(std::span<const RunReport> reports,
                        std::span<const std::int64_t> budgets) {
  if (reports.size() != budgets.size())
    throw std::invalid_argument("one budget per report expected");
  std::string out = "strategy,seed,budget,final_accuracy,total_joules,utility\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out += fmt::format("{},{},{},{:.6f},{:.9g},{:.9g}\n", r.strategy, r.seed, budgets[i],
                       r.final_accuracy, r.ledger.total(), r.utility());
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << content;
  f.flush();
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

void emit_report(const RunReport& report, const RunConfig& config,
                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "summary.json", summary_json(report, config));
  write_text(dir / "trace.csv", trace_csv(report));
  write_text(dir / "events.jsonl", events_jsonl(report, config));
  const std::int64_t budget = config.budget;
  write_text(dir / "scatter.csv",
             scatter_csv(std::span<const RunReport>(&report, 1),
                         std::span<const std::int64_t>(&budget, 1)));
}

}  // namespace hemrt::harness
