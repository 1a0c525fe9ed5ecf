#include "hemrt/selector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hemrt {

std::string_view to_string(SelectMode mode) noexcept {
  return mode == SelectMode::HighestUtility ? "HU" : "LE";
}

SelectMode parse_select_mode(std::string_view text) {
  if (text == "HU" || text == "hu") return SelectMode::HighestUtility;
  if (text == "LE" || text == "le") return SelectMode::LowestEnergy;
  throw std::invalid_argument("unknown selection mode '" + std::string(text) + "'");
}

double accuracy_gain(double accuracy, std::size_t classes_seen) noexcept {
  const double baseline = classes_seen == 0 ? 0.0 : 1.0 / static_cast<double>(classes_seen);
  return std::max(accuracy - baseline, 0.0);
}

double utility(const ProfileRecord& record, std::size_t classes_seen) {
  if (!(record.energy_estimate > 0.0))
    throw std::invalid_argument("utility needs a positive energy estimate");
  return accuracy_gain(record.accuracy_estimate, classes_seen) / record.energy_estimate;
}

bool ranks_before(const ProfileRecord& a, const ProfileRecord& b) noexcept {
  if (a.accuracy_estimate != b.accuracy_estimate)
    return a.accuracy_estimate > b.accuracy_estimate;
  if (a.energy_estimate != b.energy_estimate) return a.energy_estimate < b.energy_estimate;
  if (a.conf.total() != b.conf.total()) return a.conf.total() < b.conf.total();
  return a.conf < b.conf;
}

std::vector<ProfileRecord> apply_cutline(std::span<const ProfileRecord> records,
                                         double fraction) {
  if (records.empty()) throw std::invalid_argument("cutline over an empty record list");
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("cutline fraction must be in (0, 1]");
  std::vector<ProfileRecord> ranked(records.begin(), records.end());
  std::sort(ranked.begin(), ranked.end(), ranks_before);
  // 1e-9 keeps 0.3 * 10 from rounding up to 4.
  const double raw = fraction * static_cast<double>(ranked.size());
  auto keep = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  keep = std::clamp<std::size_t>(keep, 1, ranked.size());
  ranked.resize(keep);
  return ranked;
}

Selection select(std::span<const ProfileRecord> records, double cutline, SelectMode mode,
                 std::size_t classes_seen) {
  const auto kept = apply_cutline(records, cutline);
  std::size_t best = 0;
  for (std::size_t i = 1; i < kept.size(); ++i) {
    if (mode == SelectMode::HighestUtility) {
      if (utility(kept[i], classes_seen) > utility(kept[best], classes_seen)) best = i;
    } else if (kept[i].energy_estimate < kept[best].energy_estimate) {
      best = i;
    }
  }
  return {kept[best], utility(kept[best], classes_seen), kept.size()};
}

}  // namespace hemrt
