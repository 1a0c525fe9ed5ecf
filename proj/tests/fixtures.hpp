#pragma once

#include <vector>

#include "hemrt/domain.hpp"
#include "hemrt/harness/stream_gen.hpp"
#include "hemrt/runtime.hpp"

namespace hemrt::testing {

// Samples with ids starting at `first_id`, `per_class` of each label, in
// class-major order. Features encode the id so payloads are distinguishable.
inline std::vector<SampleRef> make_samples(std::vector<ClassId> labels, int per_class,
                                           SampleId first_id = 0, std::size_t dim = 4,
                                           std::uint32_t bytes = 16) {
  std::vector<SampleRef> out;
  SampleId id = first_id;
  for (ClassId c : labels)
    for (int i = 0; i < per_class; ++i) {
      std::vector<float> f(dim, static_cast<float>(c));
      f[0] = static_cast<float>(id);
      out.push_back(make_sample(id++, c, std::move(f), bytes));
    }
  return out;
}

inline Task make_task(int task_id, std::vector<ClassId> labels, int per_class,
                      SampleId first_id = 0, std::size_t dim = 4, std::uint32_t bytes = 16) {
  Task t;
  t.task_id = task_id;
  t.samples = make_samples(labels, per_class, first_id, dim, bytes);
  t.class_set.insert(labels.begin(), labels.end());
  return t;
}

inline std::vector<ClassId> class_range(ClassId first, int n) {
  std::vector<ClassId> v;
  for (int i = 0; i < n; ++i) v.push_back(first + i);
  return v;
}

// Conf fixture whose accuracy/energy orderings follow the worked example
// for the utility selector: 15 confs profiled on a 100-class task.
inline std::vector<ProfileRecord> utility_fixture() {
  auto r = [](std::int64_t sb, std::int64_t em, double acc, double joules) {
    return ProfileRecord{{sb, em}, acc, joules, 15};
  };
  return {
      r(500, 500, 0.30, 100.0),    r(500, 1000, 0.33, 150.0),  r(1000, 500, 0.35, 150.0),
      r(1000, 1000, 0.40, 200.0),  r(1000, 1500, 0.50, 250.0), r(1000, 2000, 0.61, 300.0),
      r(2000, 1000, 0.45, 300.0),  r(2000, 2000, 0.48, 400.0), r(2000, 4000, 0.49, 600.0),
      r(3000, 3000, 0.47, 600.0),  r(3000, 6000, 0.485, 900.0), r(4000, 4000, 0.46, 800.0),
      r(4000, 8000, 0.495, 1200.0), r(5000, 5000, 0.49, 1000.0), r(5000, 10000, 0.62, 1500.0),
  };
}
inline constexpr std::size_t kUtilityFixtureClasses = 100;

// Small stream for fast end-to-end tests.
inline harness::StreamSpec small_spec(std::uint64_t seed = 1, int tasks = 3) {
  harness::StreamSpec s;
  s.n_tasks = tasks;
  s.classes_per_task = 4;
  s.samples_per_class = 60;
  s.test_samples_per_class = 20;
  s.feature_dim = 8;
  s.seed = seed;
  return s;
}

inline RunConfig small_config(std::uint64_t seed = 1) {
  RunConfig c;
  c.epochs = 6;
  c.budget = 400;
  c.step = 50;
  c.learner.input_dim = 8;
  c.learner.hidden = 16;
  c.profiler.conf_samples = 6;
  c.profiler.warmup_epochs = 2;
  c.profiler.profile_epochs = 2;
  c.profiler.subsample = 0.2;
  c.profiler.warmup_subsample = 0.2;
  c.seed = seed;
  return c;
}

}  // namespace hemrt::testing
