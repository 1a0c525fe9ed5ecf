#include "hemrt/harness/trace_files.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace hemrt::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size();
}

// Calls `row(a, b, line_no)` for every data row of a two-column file.
template <typename A, typename B, typename F>
void for_each_row(std::istream& in, F&& row) {
  std::string line;
  int line_no = 0;
  bool first_data = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto comma = t.find(',');
    A a{};
    B b{};
    const bool ok = comma != std::string::npos && parse_number(t.substr(0, comma), a) &&
                    parse_number(t.substr(comma + 1), b);
    if (!ok) {
      if (first_data) {  // header
        first_data = false;
        continue;
      }
      throw std::runtime_error(fmt::format("line {}: expected two numeric columns", line_no));
    }
    first_data = false;
    row(a, b, line_no);
  }
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return f;
}

}  // namespace

std::vector<LoadPoint> parse_load_trace(std::istream& in) {
  std::vector<LoadPoint> out;
  for_each_row<double, double>(in, [&](double t, double bps, int line_no) {
    if (t < 0.0 || bps < 0.0)
      throw std::runtime_error(fmt::format("line {}: negative time or load", line_no));
    if (!out.empty() && t < out.back().time_s)
      throw std::runtime_error(fmt::format("line {}: times must be non-decreasing", line_no));
    out.push_back({t, bps});
  });
  return out;
}

std::vector<LoadPoint> read_load_trace(const std::filesystem::path& path) {
  auto f = open(path);
  return parse_load_trace(f);
}

std::vector<BudgetChange> parse_budget_schedule(std::istream& in) {
  std::vector<BudgetChange> out;
  for_each_row<int, std::int64_t>(in, [&](int epoch, std::int64_t budget, int line_no) {
    if (epoch < 1 || budget < 1)
      throw std::runtime_error(fmt::format("line {}: epoch and budget must be positive", line_no));
    out.push_back({epoch, budget});
  });
  return out;
}

std::vector<BudgetChange> read_budget_schedule(const std::filesystem::path& path) {
  auto f = open(path);
  return parse_budget_schedule(f);
}

}  // namespace hemrt::harness
