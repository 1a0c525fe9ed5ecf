#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hemrt {

using SampleId = std::int64_t;
using ClassId = std::int32_t;

// One labeled training example. The runtime moves samples between the stream
// buffer, episodic memory and storage but never inspects the payload.
struct Sample {
  SampleId id = 0;
  ClassId class_label = 0;
  std::vector<float> features;
  std::uint32_t size_bytes = 0;
};

// Samples are immutable once created and shared between SB, EM and archive.
using SampleRef = std::shared_ptr<const Sample>;

SampleRef make_sample(SampleId id, ClassId label, std::vector<float> features,
                      std::uint32_t size_bytes);

struct Task {
  int task_id = 1;
  std::vector<SampleRef> samples;
  std::set<ClassId> class_set;
};

inline constexpr std::int64_t kDefaultSizingStep = 500;

// An (SB size, EM size) allocation in sample counts.
struct Conf {
  std::int64_t sb_size = 0;
  std::int64_t em_size = 0;

  [[nodiscard]] constexpr std::int64_t total() const noexcept {
    return sb_size + em_size;
  }
  friend constexpr auto operator<=>(const Conf&, const Conf&) = default;
};

[[nodiscard]] bool is_valid_conf(Conf conf, std::int64_t step) noexcept;
// Throws std::invalid_argument describing the violated invariant.
void validate_conf(Conf conf, std::int64_t step);
std::string to_string(Conf conf);

struct MemoryBudget {
  std::int64_t max_samples = 0;
  int epoch_of_last_change = 0;
};

// Average per-epoch swap ratio decomposed into a firing interval and the
// fraction of drawn EM samples replaced per firing.
struct SwapPlan {
  double ratio = 0.0;
  int interval_epochs = 5;
  double percent_per_firing = 0.0;

  [[nodiscard]] bool fires() const noexcept { return percent_per_firing > 0.0; }
  [[nodiscard]] static SwapPlan disabled() noexcept { return {0.0, 5, 0.0}; }
  friend bool operator==(const SwapPlan&, const SwapPlan&) = default;
};

enum class IoState { Congested, Idle, Stable };
std::string_view to_string(IoState state) noexcept;

struct ProfileRecord {
  Conf conf;
  double accuracy_estimate = 0.0;
  double energy_estimate = 0.0;
  int epoch_measured = 0;
};

enum class EnergyComponent : std::size_t {
  GpuDynamic = 0,
  Static = 1,
  Io = 2,
  Ram = 3,
  Profiling = 4,
};
inline constexpr std::size_t kEnergyComponentCount = 5;
std::string_view to_string(EnergyComponent component) noexcept;

// Append-only joule accounting. The running total is accumulated separately
// from the per-component sums so conservation can be checked.
class EnergyLedger {
 public:
  void add(EnergyComponent component, double joules);
  void add_wall_time(double seconds);

  [[nodiscard]] double component(EnergyComponent c) const noexcept {
    return joules_[static_cast<std::size_t>(c)];
  }
  [[nodiscard]] double total() const noexcept { return total_; }
  [[nodiscard]] double sum_of_components() const noexcept;
  [[nodiscard]] double wall_time_seconds() const noexcept { return wall_time_; }
  // Everything except profiling overhead.
  [[nodiscard]] double training_total() const noexcept;

  void merge(const EnergyLedger& other);

 private:
  std::array<double, kEnergyComponentCount> joules_{};
  double total_ = 0.0;
  double wall_time_ = 0.0;
};

enum class StreamKind { ClassIncremental, DomainIncremental };

struct StreamIssue {
  enum class Kind {
    SharedClass,
    DimensionMismatch,
    LabelOutsideClassSet,
    SizeMismatch,
    DuplicateId,
    NonPositiveSize,
  };
  Kind kind;
  int task_id;
  std::string detail;
};

struct StreamReport {
  std::size_t task_count = 0;
  std::size_t sample_count = 0;
  std::size_t feature_dim = 0;
  std::uint32_t sample_bytes = 0;
  std::vector<StreamIssue> issues;

  [[nodiscard]] bool ok() const noexcept { return issues.empty(); }
};

// Checks class disjointness (class-incremental streams only), feature
// dimensionality, uniform sample size and label membership. Throws
// std::invalid_argument for an empty stream or a task with no samples.
StreamReport validate_stream(std::span<const Task> tasks,
                             StreamKind kind = StreamKind::ClassIncremental);

}  // namespace hemrt
