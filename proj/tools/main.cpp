// hemrt: run, sweep and validate continual-learning runs on synthetic streams.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hemrt/harness/baselines.hpp"
#include "hemrt/harness/report.hpp"
#include "hemrt/harness/stream_gen.hpp"
#include "hemrt/harness/trace_files.hpp"

namespace fs = std::filesystem;
using namespace hemrt;
using namespace hemrt::harness;

namespace {

struct Options {
  StreamSpec stream;
  RunConfig run;
  std::string mode = "HU";
  std::string drift = "none";
  std::string strategy = "adaptive";
  double heuristic_fraction = 1.0;
  bool fixed_swap = false;
  std::int64_t archive_cap = 0;
  std::string congestion_trace;
  std::string budget_trace;
  fs::path out = "hemrt-out";

  std::vector<std::int64_t> budgets{1000, 2500, 5000};
  std::vector<std::string> strategies{"adaptive", "carm-static", "heuristic"};
  int seeds = 3;
};

void add_options(CLI::App& app, Options& o) {
  auto& s = o.stream;
  auto& r = o.run;
  app.add_option("--tasks", s.n_tasks, "Tasks in the stream")->capture_default_str();
  app.add_option("--classes-per-task", s.classes_per_task)->capture_default_str();
  app.add_option("--samples-per-class", s.samples_per_class)->capture_default_str();
  app.add_option("--test-samples-per-class", s.test_samples_per_class)->capture_default_str();
  app.add_option("--feature-dim", s.feature_dim)->capture_default_str();
  app.add_option("--separation", s.separation, "Class-center scale in noise units")
      ->capture_default_str();
  app.add_option("--modes-per-class", s.modes_per_class)->capture_default_str();
  app.add_option("--mode-spread", s.mode_spread)->capture_default_str();
  app.add_option("--drift", o.drift, "none | shifted")->capture_default_str();
  app.add_option("--drift-scale", s.drift_scale)->capture_default_str();
  app.add_flag("--domain-incremental", s.domain_incremental);
  app.add_option("--sample-bytes", s.sample_bytes)->capture_default_str();

  app.add_option("--epochs", r.epochs)->capture_default_str();
  app.add_option("--batch-size", r.batch_size)->capture_default_str();
  app.add_option("--lr", r.learning_rate)->capture_default_str();
  app.add_option("--hidden", r.learner.hidden)->capture_default_str();
  app.add_option("--budget", r.budget, "Memory budget in samples")->capture_default_str();
  app.add_option("--step", r.step, "Sizing step in samples")->capture_default_str();
  app.add_option("--cutline", r.cutline)->capture_default_str();
  app.add_option("--mode", o.mode, "HU | LE")->capture_default_str();
  app.add_option("--probe-fraction", r.probe_fraction)->capture_default_str();
  app.add_option("--profile-confs", r.profiler.conf_samples)->capture_default_str();
  app.add_option("--warmup-epochs", r.profiler.warmup_epochs)->capture_default_str();
  app.add_option("--profile-epochs", r.profiler.profile_epochs)->capture_default_str();
  app.add_option("--subsample", r.profiler.subsample)->capture_default_str();
  app.add_option("--warmup-subsample", r.profiler.warmup_subsample)->capture_default_str();
  app.add_option("--bandwidth", r.bandwidth_bytes_per_s, "Storage bytes/s")
      ->capture_default_str();
  app.add_option("--swap-ratio", r.initial_swap_ratio)->capture_default_str();
  app.add_flag("--fixed-swap", o.fixed_swap, "Disable swap-ratio adaptation");
  app.add_option("--archive-cap", o.archive_cap, "Archive cap in samples (0 = none)");
  app.add_option("--sec-per-sample", r.cost.seconds_per_sample_step)->capture_default_str();
  app.add_option("--gpu-watts", r.cost.gpu_dynamic_watts)->capture_default_str();
  app.add_option("--static-watts", r.cost.static_watts)->capture_default_str();
  app.add_option("--io-watts", r.cost.io_active_watts)->capture_default_str();
  app.add_option("--ram-watts-per-1k", r.cost.ram_watts_per_1k_samples)->capture_default_str();
  app.add_option("--seed", r.seed)->capture_default_str();
  app.add_option("--strategy", o.strategy,
                 "adaptive | carm-static | best-static | best-history | heuristic")
      ->capture_default_str();
  app.add_option("--heuristic-fraction", o.heuristic_fraction)->capture_default_str();
  app.add_option("--congestion-trace", o.congestion_trace,
                 "CSV of time_seconds,bytes_per_second background load");
  app.add_option("--budget-trace", o.budget_trace,
                 "CSV of effective_epoch,new_budget_samples updates");
  app.add_option("--out", o.out, "Output directory")->capture_default_str();
}

void finalize(Options& o) {
  o.stream.drift = parse_drift(o.drift);
  o.run.mode = parse_select_mode(o.mode);
  o.run.adaptive_swap = !o.fixed_swap;
  o.run.learner.input_dim = o.stream.feature_dim;
  if (o.archive_cap > 0) o.run.archive_capacity = o.archive_cap;
  if (!o.congestion_trace.empty()) o.run.external_load = read_load_trace(o.congestion_trace);
  if (!o.budget_trace.empty()) o.run.budget_schedule = read_budget_schedule(o.budget_trace);
  o.stream.validate();
  o.run.validate();
}

void print_summary(const RunReport& r) {
  fmt::print("{:<14} seed {:>3}  acc {:.4f}  joules {:>10.2f}  utility {:.3e}{}\n",
             r.strategy, r.seed, r.final_accuracy, r.ledger.total(), r.utility(),
             r.aborted ? "  [aborted: " + r.abort_reason + "]" : "");
}

int cmd_run(Options& o) {
  finalize(o);
  const auto stream = generate_stream(o.stream);
  const auto report =
      run_strategy(parse_strategy(o.strategy), stream, o.run, o.heuristic_fraction);
  emit_report(report, o.run, o.out);
  print_summary(report);
  fmt::print("wrote {}\n", o.out.string());
  return report.aborted ? 2 : 0;
}

int cmd_sweep(Options& o) {
  finalize(o);
  std::vector<RunReport> reports;
  std::vector<std::int64_t> budgets;
  const auto base_seed = o.run.seed;
  for (int k = 0; k < o.seeds; ++k) {
    StreamSpec spec = o.stream;
    spec.seed = o.stream.seed + static_cast<std::uint64_t>(k);
    const auto stream = generate_stream(spec);
    for (std::int64_t budget : o.budgets) {
      for (const auto& name : o.strategies) {
        RunConfig cfg = o.run;
        cfg.budget = budget;
        cfg.seed = base_seed + static_cast<std::uint64_t>(k);
        cfg.validate();
        auto report = run_strategy(parse_strategy(name), stream, cfg, o.heuristic_fraction);
        emit_report(report, cfg,
                    o.out / fmt::format("{}_b{}_s{}", report.strategy, budget, cfg.seed));
        print_summary(report);
        reports.push_back(std::move(report));
        budgets.push_back(budget);
      }
    }
  }
  write_text(o.out / "scatter.csv", scatter_csv(reports, budgets));
  fmt::print("wrote {} runs to {}\n", reports.size(), o.out.string());
  return 0;
}

int cmd_validate(Options& o) {
  finalize(o);
  const auto stream = generate_stream(o.stream);
  const auto rep = validate_stream(stream.tasks, stream.kind);
  fmt::print("tasks {}  samples {}  feature_dim {}  sample_bytes {}\n", rep.task_count,
             rep.sample_count, rep.feature_dim, rep.sample_bytes);
  for (const auto& issue : rep.issues)
    fmt::print("task {}: {}\n", issue.task_id, issue.detail);
  const auto train_size = static_cast<std::int64_t>(
      split_probe(stream.tasks.front(), o.run.probe_fraction, o.run.seed).first.size());
  const auto space = build_search_space({o.run.budget, 0}, train_size, o.run.step);
  fmt::print("search space at budget {}: {} confs\n", o.run.budget, space.size());
  fmt::print("{}\n", rep.ok() ? "valid" : "INVALID");
  return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replay-based continual learning over a memory hierarchy"};
  app.set_config("--config", "", "TOML/INI file with option values");
  app.fallthrough();
  app.require_subcommand(1);
  Options o;
  add_options(app, o);

  auto* run = app.add_subcommand("run", "Run one strategy on one stream");
  auto* sweep = app.add_subcommand("sweep", "Strategies x budgets x seeds");
  sweep->add_option("--budgets", o.budgets)->capture_default_str();
  sweep->add_option("--strategies", o.strategies)->capture_default_str();
  sweep->add_option("--seeds", o.seeds, "Number of seeds, counting up from --seed")
      ->capture_default_str();
  auto* validate = app.add_subcommand("validate", "Check a generated stream and config");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (validate->parsed()) return cmd_validate(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
