#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "hemrt/domain.hpp"
#include "hemrt/profiler.hpp"

using namespace hemrt;
using hemrt::testing::class_range;
using hemrt::testing::make_task;

TEST(ValidateStream, DisjointTasksAreValid) {
  std::vector<Task> tasks;
  for (int t = 0; t < 10; ++t)
    tasks.push_back(make_task(t + 1, class_range(t * 10, 10), 3, t * 1000));
  const auto rep = validate_stream(tasks);
  EXPECT_TRUE(rep.ok());
  EXPECT_EQ(rep.task_count, 10u);
  EXPECT_EQ(rep.sample_count, 300u);
  EXPECT_EQ(rep.feature_dim, 4u);
}

TEST(ValidateStream, SharedClassIsListed) {
  std::vector<Task> tasks{make_task(1, {1, 2, 3}, 2, 0), make_task(2, {3, 4}, 2, 100)};
  const auto rep = validate_stream(tasks);
  ASSERT_FALSE(rep.ok());
  EXPECT_EQ(rep.issues.front().kind, StreamIssue::Kind::SharedClass);
  EXPECT_EQ(rep.issues.front().task_id, 2);
}

TEST(ValidateStream, SharedClassAllowedWhenDomainIncremental) {
  std::vector<Task> tasks{make_task(1, {1, 2}, 2, 0), make_task(2, {1, 2}, 2, 100)};
  EXPECT_TRUE(validate_stream(tasks, StreamKind::DomainIncremental).ok());
}

TEST(ValidateStream, EmptyTaskIsAnError) {
  std::vector<Task> tasks{make_task(1, {1}, 2, 0), make_task(2, {2}, 0, 100)};
  EXPECT_THROW(validate_stream(tasks), std::invalid_argument);
  EXPECT_THROW(validate_stream(std::vector<Task>{}), std::invalid_argument);
}

TEST(ValidateStream, DimensionSizeLabelAndIdIssues) {
  auto t1 = make_task(1, {1}, 2, 0);
  t1.samples.push_back(make_sample(50, 1, {1.0f, 2.0f}, 16));     // wrong dim
  t1.samples.push_back(make_sample(51, 1, std::vector<float>(4), 32));  // wrong size
  t1.samples.push_back(make_sample(52, 9, std::vector<float>(4), 16));  // label not in set
  t1.samples.push_back(make_sample(0, 1, std::vector<float>(4), 16));   // duplicate id
  const auto rep = validate_stream(std::vector<Task>{t1});
  auto has = [&](StreamIssue::Kind k) {
    for (const auto& i : rep.issues)
      if (i.kind == k) return true;
    return false;
  };
  EXPECT_TRUE(has(StreamIssue::Kind::DimensionMismatch));
  EXPECT_TRUE(has(StreamIssue::Kind::SizeMismatch));
  EXPECT_TRUE(has(StreamIssue::Kind::LabelOutsideClassSet));
  EXPECT_TRUE(has(StreamIssue::Kind::DuplicateId));
}

TEST(Conf, Validation) {
  EXPECT_TRUE(is_valid_conf({500, 0}, 500));
  EXPECT_TRUE(is_valid_conf({0, 500}, 500));
  EXPECT_FALSE(is_valid_conf({0, 0}, 500));
  EXPECT_FALSE(is_valid_conf({250, 500}, 500));
  EXPECT_FALSE(is_valid_conf({-500, 1000}, 500));
  EXPECT_THROW(validate_conf({0, 0}, 500), std::invalid_argument);
  EXPECT_THROW(validate_conf({100, 0}, 500), std::invalid_argument);
  EXPECT_NO_THROW(validate_conf({1000, 1500}, 500));
  EXPECT_EQ(to_string(Conf{1000, 2000}), "(1000, 2000)");
}

TEST(Conf, EnumeratedConfsRespectBudgetAndStep) {
  for (std::int64_t step : {50, 100, 500})
    for (std::int64_t budget = step; budget <= 20 * step; budget += step / 2 + 7)
      for (std::int64_t task : {std::int64_t{1}, 3 * step / 2, 7 * step, 40 * step}) {
        if (budget < step) continue;
        for (const Conf& c : build_search_space({budget, 0}, task, step)) {
          EXPECT_LE(c.total(), budget);
          EXPECT_EQ(c.sb_size % step, 0);
          EXPECT_EQ(c.em_size % step, 0);
          EXPECT_TRUE(is_valid_conf(c, step));
        }
      }
}

TEST(EnergyLedger, ConservationAndMonotonicity) {
  EnergyLedger ledger;
  double prev = 0.0;
  for (int i = 0; i < 1000; ++i) {
    ledger.add(static_cast<EnergyComponent>(i % kEnergyComponentCount), 0.1 * (i % 7) + 1e-3);
    EXPECT_GE(ledger.total(), prev);
    prev = ledger.total();
  }
  EXPECT_NEAR(ledger.total(), ledger.sum_of_components(), 1e-9 * ledger.total());
  EXPECT_NEAR(ledger.training_total() + ledger.component(EnergyComponent::Profiling),
              ledger.total(), 1e-9 * ledger.total());
}

TEST(EnergyLedger, RejectsNegativeAndNonFinite) {
  EnergyLedger ledger;
  EXPECT_THROW(ledger.add(EnergyComponent::Io, -1.0), std::invalid_argument);
  EXPECT_THROW(ledger.add(EnergyComponent::Io, NAN), std::invalid_argument);
  EXPECT_THROW(ledger.add_wall_time(-0.5), std::invalid_argument);
  EXPECT_EQ(ledger.total(), 0.0);
}

TEST(EnergyLedger, MergeAddsComponentwise) {
  EnergyLedger a, b;
  a.add(EnergyComponent::GpuDynamic, 2.0);
  b.add(EnergyComponent::GpuDynamic, 3.0);
  b.add(EnergyComponent::Profiling, 1.0);
  b.add_wall_time(4.0);
  a.merge(b);
  EXPECT_DOUBLE_EQ(a.component(EnergyComponent::GpuDynamic), 5.0);
  EXPECT_DOUBLE_EQ(a.component(EnergyComponent::Profiling), 1.0);
  EXPECT_DOUBLE_EQ(a.total(), 6.0);
  EXPECT_DOUBLE_EQ(a.wall_time_seconds(), 4.0);
}
