#include "hemrt/swap_controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hemrt {

namespace {

// Ratios live on a 1e-9 grid so additive steps do not accumulate drift and
// plans round-trip exactly.
double snap(double x) noexcept { return std::round(x * 1e9) / 1e9; }

}  // namespace

IoState classify_io(std::optional<double> rate, int empty_queue_epochs, double current_ratio,
                    const IoThresholds& thresholds) {
  if (rate && *rate < thresholds.congested_below) return IoState::Congested;
  if (empty_queue_epochs >= thresholds.idle_empty_epochs && current_ratio < 1.0)
    return IoState::Idle;
  return IoState::Stable;
}

double adjust_ratio(double current, IoState state, const AimdParams& params) {
  if (!(current > 0.0) || current > 1.0)
    throw std::invalid_argument("swap ratio must be in (0, 1]");
  switch (state) {
    case IoState::Idle: return std::min(snap(current + params.increase), 1.0);
    case IoState::Congested: return std::max(current * params.decrease_factor, params.floor);
    case IoState::Stable: return current;
  }
  return current;
}

SwapPlan plan_from_ratio(double ratio) {
  if (!(ratio > 0.0)) return SwapPlan::disabled();
  if (ratio > 1.0) throw std::invalid_argument("swap ratio must not exceed 1");
  SwapPlan plan;
  if (ratio >= kIntervalRegimeFloor) {
    const double inverse = std::floor(1.0 / ratio + 0.5);
    plan.interval_epochs = std::clamp(static_cast<int>(inverse), 1, kMaxSwapInterval);
    plan.percent_per_firing = 1.0;
  } else {
    plan.interval_epochs = kMaxSwapInterval;
    plan.percent_per_firing = snap(kMaxSwapInterval * ratio);
  }
  plan.ratio = plan.percent_per_firing / plan.interval_epochs;
  return plan;
}

double ratio_of_plan(const SwapPlan& plan) noexcept {
  return plan.fires() ? plan.percent_per_firing / plan.interval_epochs : 0.0;
}

double interval_quantization_bound(int interval) {
  if (interval < 1 || interval > kMaxSwapInterval)
    throw std::invalid_argument("interval out of range");
  const double here = 1.0 / interval;
  double bound = 0.0;
  if (interval > 1) bound = std::max(bound, 1.0 / (interval - 1) - here);
  if (interval < kMaxSwapInterval) bound = std::max(bound, here - 1.0 / (interval + 1));
  return bound;
}

SwapController::SwapController(double initial_ratio, bool adaptive, AimdParams aimd,
                               IoThresholds thresholds)
    : ratio_(initial_ratio),
      plan_(plan_from_ratio(initial_ratio)),
      adaptive_(adaptive),
      aimd_(aimd),
      thresholds_(thresholds) {
  if (initial_ratio < 0.0 || initial_ratio > 1.0)
    throw std::invalid_argument("initial swap ratio must be in [0, 1]");
}

std::optional<ControllerDecision> SwapController::react(int epoch, IoState state) {
  if (!adaptive_ || state == IoState::Stable || ratio_ <= 0.0) return std::nullopt;
  const double old_ratio = ratio_;
  ratio_ = adjust_ratio(ratio_, state, aimd_);
  const SwapPlan next = plan_from_ratio(ratio_);
  if (!(next == plan_)) {
    plan_ = next;
    epochs_into_plan_ = 0;
  }
  ControllerDecision d{epoch, state, old_ratio, ratio_, plan_.interval_epochs,
                       plan_.percent_per_firing};
  log_.push_back(d);
  return d;
}

bool SwapController::advance_epoch() noexcept {
  if (!plan_.fires()) return false;
  ++epochs_into_plan_;
  if (epochs_into_plan_ >= plan_.interval_epochs) {
    epochs_into_plan_ = 0;
    return true;
  }
  return false;
}

}  // namespace hemrt
