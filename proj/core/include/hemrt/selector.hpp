#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "hemrt/domain.hpp"

namespace hemrt {

enum class SelectMode { HighestUtility, LowestEnergy };
std::string_view to_string(SelectMode mode) noexcept;
SelectMode parse_select_mode(std::string_view text);  // "HU" | "LE"

inline constexpr double kDefaultCutline = 0.5;

// Accuracy above random guessing over `classes_seen` classes, clamped at 0.
double accuracy_gain(double accuracy, std::size_t classes_seen) noexcept;
// Accuracy gain per joule. Requires energy_estimate > 0.
double utility(const ProfileRecord& record, std::size_t classes_seen);

// Strict ranking: higher accuracy, then lower energy, then fewer samples,
// then lexicographically smaller conf.
bool ranks_before(const ProfileRecord& a, const ProfileRecord& b) noexcept;

// Top ceil(fraction * n) records in rank order. Throws on empty input or a
// fraction outside (0, 1].
std::vector<ProfileRecord> apply_cutline(std::span<const ProfileRecord> records,
                                         double fraction);

struct Selection {
  ProfileRecord record;
  double utility = 0.0;
  std::size_t candidates = 0;  // records surviving the cutline
};

// HU: best utility inside the cutline subset; LE: least energy inside it.
// Ties resolve in rank order.
Selection select(std::span<const ProfileRecord> records, double cutline, SelectMode mode,
                 std::size_t classes_seen);

}  // namespace hemrt
