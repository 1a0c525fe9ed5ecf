#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hemrt/runtime.hpp"

namespace hemrt::harness {

enum class StrategyKind { Adaptive, CarmStatic, BestStatic, BestHistory, Heuristic };
std::string_view to_string(StrategyKind kind) noexcept;
// "adaptive" | "carm-static" | "best-static" | "best-history" | "heuristic"
StrategyKind parse_strategy(std::string_view text);

// Fixed conf used by the static baseline: half the budget to EM, the other
// half (capped at the task size) to SB, snapped to the step grid.
Conf carm_static_conf(const PolicyInput& in);

// Memory split in proportion to tasks held: SB keeps the new task, EM the
// t - 1 old ones, out of `fraction` of the budget.
Conf heuristic_conf(const PolicyInput& in, double fraction);

std::unique_ptr<ConfPolicy> make_adaptive(const RunConfig& config);
std::unique_ptr<ConfPolicy> make_carm_static();
std::unique_ptr<ConfPolicy> make_heuristic(double fraction);

struct GridRun {
  Conf conf;
  RunReport report;
};

struct BestStaticResult {
  std::vector<GridRun> runs;
  Conf winner;        // over the whole stream
  Conf half_winner;   // judged after the first ceil(n/2) tasks
  std::size_t winner_index = 0;
};

// Runs every static conf of the step grid over the whole stream and picks
// the winner with the same cutline + HU/LE rule the runtime uses.
BestStaticResult best_static(const TaskStream& stream, const RunConfig& config);

// BestStatic's conf for the first ceil(n/2) tasks, then the conf that looked
// best at that point for the rest.
RunReport best_history(const TaskStream& stream, const RunConfig& config,
                       const BestStaticResult& grid);

// One strategy run end to end (BestStatic/BestHistory run their grids).
RunReport run_strategy(StrategyKind kind, const TaskStream& stream, const RunConfig& config,
                       double heuristic_fraction = 1.0);

}  // namespace hemrt::harness
