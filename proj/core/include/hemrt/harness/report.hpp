#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "hemrt/runtime.hpp"

namespace hemrt::harness {

// Column order of trace.csv; bump the version when it changes.
inline constexpr std::string_view kTraceColumns =
    "task,epoch,loss,swap_ratio,io_state,em_size,sb_size,joules_cum";
inline constexpr int kTraceFormatVersion = 1;

std::string summary_json(const RunReport& report, const RunConfig& config);
std::string trace_csv(const RunReport& report);
// One JSON object per line: profile, selection, controller, warning events.
std::string events_jsonl(const RunReport& report, const RunConfig& config);
std::string scatter_csv(std::span<const RunReport> reports, std::span<const std::int64_t> budgets);

// Throws std::runtime_error when the file cannot be written.
void write_text(const std::filesystem::path& path, const std::string& content);

// Writes summary.json, trace.csv, events.jsonl and scatter.csv into `dir`.
void emit_report(const RunReport& report, const RunConfig& config,
                 const std::filesystem::path& dir);

}  // namespace hemrt::harness
