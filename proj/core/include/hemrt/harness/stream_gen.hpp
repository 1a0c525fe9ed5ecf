#pragma once

#include <cstdint>
#include <string_view>

#include "hemrt/runtime.hpp"

namespace hemrt::harness {

enum class DriftProfile { None, Shifted };
std::string_view to_string(DriftProfile drift) noexcept;
DriftProfile parse_drift(std::string_view text);  // "none" | "shifted"

// Synthetic task stream: each class is a mixture of Gaussian sub-clusters.
struct StreamSpec {
  int n_tasks = 10;
  int classes_per_task = 10;
  int samples_per_class = 200;
  int test_samples_per_class = 50;
  std::size_t feature_dim = 32;
  // Scale of class centers relative to the unit per-feature noise.
  double separation = 3.0;
  int modes_per_class = 4;
  // Spread of a class's sub-cluster centers around the class center.
  double mode_spread = 1.0;
  DriftProfile drift = DriftProfile::None;
  // Per-task center shift (in noise units) under DriftProfile::Shifted.
  double drift_scale = 0.5;
  // Every task reuses the same classes instead of introducing new ones.
  bool domain_incremental = false;
  std::uint32_t sample_bytes = 3072;
  std::uint64_t seed = 1;

  void validate() const;
};

// Deterministic under spec.seed. Training samples within a task are shuffled
// so any prefix covers the task's classes roughly evenly.
TaskStream generate_stream(const StreamSpec& spec);

}  // namespace hemrt::harness
