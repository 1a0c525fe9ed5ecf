#pragma once

#include <optional>
#include <vector>

#include "hemrt/domain.hpp"

namespace hemrt {

struct IoThresholds {
  // Completion rate below this means the queue is backing up.
  double congested_below = 0.90;
  // Consecutive probes with an empty queue before the channel counts as idle.
  int idle_empty_epochs = 2;
};

struct AimdParams {
  double increase = 0.10;        // absolute, in ratio units
  double decrease_factor = 0.5;  // multiplicative
  double floor = 0.01;
};

// `rate` is the completion fraction of recently issued swaps (std::nullopt
// when nothing was issued, which never reads as congestion).
IoState classify_io(std::optional<double> rate, int empty_queue_epochs, double current_ratio,
                    const IoThresholds& thresholds = {});

// Idle: +increase (clamped to 1). Congested: x decrease_factor (floored).
// Stable: unchanged. Requires current in (0, 1].
double adjust_ratio(double current, IoState state, const AimdParams& params = {});

// Ratios >= 0.20 lengthen the interval (1..5 epochs, round-half-up of
// 1/ratio) at 100% per firing; below 0.20 the interval stays at 5 and the
// per-firing percent carries the ratio. ratio <= 0 disables swapping.
SwapPlan plan_from_ratio(double ratio);
double ratio_of_plan(const SwapPlan& plan) noexcept;

// Largest gap between 1/interval and a neighbouring interval's ratio; bounds
// |requested - effective| for ratios in the interval regime.
double interval_quantization_bound(int interval);

inline constexpr double kIntervalRegimeFloor = 0.20;
inline constexpr int kMaxSwapInterval = 5;

struct ControllerDecision {
  int epoch = 0;
  IoState state = IoState::Stable;
  double old_ratio = 0.0;
  double new_ratio = 0.0;
  int interval_epochs = 0;
  double percent_per_firing = 0.0;
};

// Mutable AIMD state owned by the runtime.
class SwapController {
 public:
  explicit SwapController(double initial_ratio = 1.0, bool adaptive = true,
                          AimdParams aimd = {}, IoThresholds thresholds = {});

  [[nodiscard]] IoState classify(std::optional<double> rate, int empty_queue_epochs) const {
    return classify_io(rate, empty_queue_epochs, ratio_, thresholds_);
  }

  // Estimate + Adapt for a non-Stable state. Returns the logged decision, or
  // nullopt when the state calls for no change.
  std::optional<ControllerDecision> react(int epoch, IoState state);

  // Called once per epoch boundary; true when the plan says to fire now.
  bool advance_epoch() noexcept;

  [[nodiscard]] double ratio() const noexcept { return ratio_; }
  [[nodiscard]] const SwapPlan& plan() const noexcept { return plan_; }
  [[nodiscard]] bool adaptive() const noexcept { return adaptive_; }
  [[nodiscard]] const std::vector<ControllerDecision>& decisions() const noexcept {
    return log_;
  }

 private:
  double ratio_;
  SwapPlan plan_;
  bool adaptive_;
  AimdParams aimd_;
  IoThresholds thresholds_;
  int epochs_into_plan_ = 0;
  std::vector<ControllerDecision> log_;
};

}  // namespace hemrt
