#include <gtest/gtest.h>

#include <cmath>

#include "hemrt/swap_controller.hpp"

using namespace hemrt;

TEST(ClassifyIo, Examples) {
  EXPECT_EQ(classify_io(0.5, 0, 1.0), IoState::Congested);
  EXPECT_EQ(classify_io(std::nullopt, 3, 0.8), IoState::Idle);
  EXPECT_EQ(classify_io(1.0, 5, 1.0), IoState::Stable);
  EXPECT_EQ(classify_io(std::nullopt, 0, 0.5), IoState::Stable);
  EXPECT_EQ(classify_io(std::nullopt, 10, 1.0), IoState::Stable);  // sentinel never congests
  EXPECT_EQ(classify_io(0.9, 1, 0.5), IoState::Stable);
  EXPECT_EQ(classify_io(0.89, 5, 0.5), IoState::Congested);
}

TEST(AdjustRatio, Examples) {
  EXPECT_EQ(adjust_ratio(1.0, IoState::Congested), 0.5);
  EXPECT_EQ(adjust_ratio(0.5, IoState::Congested), 0.25);
  EXPECT_EQ(adjust_ratio(0.25, IoState::Idle), 0.35);
  EXPECT_EQ(adjust_ratio(0.95, IoState::Idle), 1.0);
  EXPECT_EQ(adjust_ratio(0.3, IoState::Stable), 0.3);
  EXPECT_EQ(adjust_ratio(0.015, IoState::Congested), 0.01);
  EXPECT_THROW(adjust_ratio(0.0, IoState::Idle), std::invalid_argument);
  EXPECT_THROW(adjust_ratio(1.1, IoState::Idle), std::invalid_argument);
}

TEST(AdjustRatio, CongestionSequenceIsExactPowersOfTwo) {
  double r = 1.0;
  for (int k = 1; k <= 6; ++k) {
    r = adjust_ratio(r, IoState::Congested);
    EXPECT_EQ(r, std::ldexp(1.0, -k));
  }
}

TEST(AdjustRatio, IdleStepsLandOnTheGrid) {
  double r = 0.01;
  for (int k = 1; k <= 9; ++k) {
    r = adjust_ratio(r, IoState::Idle);
    EXPECT_EQ(r, std::round((0.01 + 0.1 * k) * 1e9) / 1e9);
  }
  EXPECT_EQ(adjust_ratio(r, IoState::Idle), 1.0);
}

TEST(PlanFromRatio, Table) {
  struct Row {
    double ratio;
    int interval;
    double percent;
  };
  for (const Row& row : {Row{1.0, 1, 1.0}, Row{0.5, 2, 1.0}, Row{0.25, 4, 1.0},
                         Row{0.20, 5, 1.0}, Row{0.10, 5, 0.5}}) {
    const auto p = plan_from_ratio(row.ratio);
    EXPECT_EQ(p.interval_epochs, row.interval) << row.ratio;
    EXPECT_EQ(p.percent_per_firing, row.percent) << row.ratio;
  }
  EXPECT_FALSE(plan_from_ratio(0.0).fires());
  EXPECT_FALSE(plan_from_ratio(-1.0).fires());
  EXPECT_THROW(plan_from_ratio(1.5), std::invalid_argument);
  // Round half up: 1/0.4 = 2.5 -> 3.
  EXPECT_EQ(plan_from_ratio(0.4).interval_epochs, 3);
}

TEST(PlanFromRatio, QuantizationBoundAndExactLowRegime) {
  for (int i = 1; i <= 1000; ++i) {
    const double r = i / 1000.0;
    const auto p = plan_from_ratio(r);
    const double eff = ratio_of_plan(p);
    EXPECT_EQ(eff, p.ratio);
    if (r >= kIntervalRegimeFloor) {
      EXPECT_LE(std::abs(eff - r), interval_quantization_bound(p.interval_epochs) + 1e-12) << r;
      EXPECT_EQ(eff, 1.0 / p.interval_epochs);
    } else {
      EXPECT_NEAR(eff, r, 1e-12) << r;
    }
  }
}

TEST(PlanFromRatio, RoundTripsThroughEffectiveRatio) {
  for (int i = 1; i <= 200; ++i) {
    const auto p = plan_from_ratio(i / 200.0);
    EXPECT_EQ(plan_from_ratio(ratio_of_plan(p)), p);
  }
}

TEST(SwapController, ThreeHalvingsStayAboveKnee) {
  SwapController c(1.0);
  for (int e = 1; e <= 3; ++e) c.react(e, IoState::Congested);
  EXPECT_EQ(c.ratio(), 0.125);
  EXPECT_GE(ratio_of_plan(c.plan()), 0.125 - 1e-12);
  ASSERT_EQ(c.decisions().size(), 3u);
  EXPECT_EQ(c.decisions()[0].old_ratio, 1.0);
  EXPECT_EQ(c.decisions()[0].new_ratio, 0.5);
  EXPECT_EQ(c.decisions()[2].interval_epochs, 5);
  EXPECT_EQ(c.decisions()[2].percent_per_firing, 0.625);
}

TEST(SwapController, FiringFollowsIntervalAndResetsOnPlanChange) {
  SwapController c(0.25);
  std::vector<bool> fired;
  for (int i = 0; i < 8; ++i) fired.push_back(c.advance_epoch());
  EXPECT_EQ(fired, (std::vector<bool>{false, false, false, true, false, false, false, true}));

  c.advance_epoch();
  c.advance_epoch();
  c.react(10, IoState::Idle);  // 0.35 -> interval 3, counter restarts
  EXPECT_EQ(c.plan().interval_epochs, 3);
  EXPECT_FALSE(c.advance_epoch());
  EXPECT_FALSE(c.advance_epoch());
  EXPECT_TRUE(c.advance_epoch());

  // Same plan after the change: the phase is kept.
  SwapController d(0.1);
  d.advance_epoch();
  d.advance_epoch();
  d.react(3, IoState::Idle);  // 0.2 -> (5, 1.0): plan differs, restart
  for (int i = 0; i < 4; ++i) EXPECT_FALSE(d.advance_epoch());
  EXPECT_TRUE(d.advance_epoch());
}

TEST(SwapController, NonAdaptiveAndDisabledNeverReact) {
  SwapController fixed(0.5, false);
  EXPECT_FALSE(fixed.react(1, IoState::Congested).has_value());
  EXPECT_EQ(fixed.ratio(), 0.5);
  SwapController off(0.0);
  EXPECT_FALSE(off.react(1, IoState::Idle).has_value());
  EXPECT_FALSE(off.advance_epoch());
  SwapController stable(0.5);
  EXPECT_FALSE(stable.react(1, IoState::Stable).has_value());
  EXPECT_THROW(SwapController(1.5), std::invalid_argument);
}
