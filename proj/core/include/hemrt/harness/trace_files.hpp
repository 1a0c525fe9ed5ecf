#pragma once

#include <filesystem>
#include <istream>
#include <vector>

#include "hemrt/runtime.hpp"
#include "hemrt/swap_engine.hpp"

namespace hemrt::harness {

// "time_seconds,bytes_per_second" rows. A header line, blank lines and
// lines starting with '#' are skipped. Throws std::runtime_error with the
// line number on malformed rows.
std::vector<LoadPoint> parse_load_trace(std::istream& in);
std::vector<LoadPoint> read_load_trace(const std::filesystem::path& path);

// "effective_epoch,new_budget_samples" rows, same rules.
std::vector<BudgetChange> parse_budget_schedule(std::istream& in);
std::vector<BudgetChange> read_budget_schedule(const std::filesystem::path& path);

}  // namespace hemrt::harness
