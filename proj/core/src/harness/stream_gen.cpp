#include "hemrt/harness/stream_gen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hemrt::harness {

namespace {

constexpr std::uint64_t kCenters = 0x43454e54;
constexpr std::uint64_t kModes = 0x4d4f4445;
constexpr std::uint64_t kDrift = 0x44524654;
constexpr std::uint64_t kDraw = 0x44524157;
constexpr std::uint64_t kOrder = 0x4f524445;

using Vec = std::vector<double>;

Vec gaussian(std::size_t dim, double scale, Rng& rng) {
  std::normal_distribution<double> n(0.0, scale);
  Vec v(dim);
  for (double& x : v) x = n(rng);
  return v;
}

}  // namespace

std::string_view to_string(DriftProfile drift) noexcept {
  return drift == DriftProfile::Shifted ? "shifted" : "none";
}

DriftProfile parse_drift(std::string_view text) {
  if (text == "none") return DriftProfile::None;
  if (text == "shifted") return DriftProfile::Shifted;
  throw std::invalid_argument("unknown drift profile '" + std::string(text) + "'");
}

void StreamSpec::validate() const {
  if (n_tasks < 1 || classes_per_task < 1 || samples_per_class < 1)
    throw std::invalid_argument("stream needs at least one task, class and sample");
  if (test_samples_per_class < 0) throw std::invalid_argument("negative test split");
  if (feature_dim < 1) throw std::invalid_argument("feature_dim must be >= 1");
  if (separation < 0.0 || mode_spread < 0.0 || drift_scale < 0.0)
    throw std::invalid_argument("separation, mode spread and drift must be >= 0");
  if (modes_per_class < 1) throw std::invalid_argument("modes_per_class must be >= 1");
  if (sample_bytes == 0) throw std::invalid_argument("sample_bytes must be positive");
}

TaskStream generate_stream(const StreamSpec& spec) {
  spec.validate();
  const std::size_t dim = spec.feature_dim;
  const int n_classes =
      spec.domain_incremental ? spec.classes_per_task : spec.n_tasks * spec.classes_per_task;
  // Centers have per-feature scale separation / sqrt(dim), so the distance
  // between two class centers is about separation * sqrt(2) noise units.
  const double center_scale = spec.separation / std::sqrt(static_cast<double>(dim));
  const double mode_scale = spec.mode_spread / std::sqrt(static_cast<double>(dim));

  std::vector<Vec> centers;
  std::vector<std::vector<Vec>> modes;
  for (int c = 0; c < n_classes; ++c) {
    Rng rng(derive_seed(spec.seed, kCenters, static_cast<std::uint64_t>(c)));
    centers.push_back(gaussian(dim, center_scale, rng));
    Rng mrng(derive_seed(spec.seed, kModes, static_cast<std::uint64_t>(c)));
    std::vector<Vec> m;
    for (int k = 0; k < spec.modes_per_class; ++k) m.push_back(gaussian(dim, mode_scale, mrng));
    modes.push_back(std::move(m));
  }

  TaskStream out;
  out.kind = spec.domain_incremental ? StreamKind::DomainIncremental
                                     : StreamKind::ClassIncremental;
  SampleId next_id = 0;
  for (int t = 0; t < spec.n_tasks; ++t) {
    Vec shift(dim, 0.0);
    if (spec.drift == DriftProfile::Shifted && t > 0) {
      Rng drng(derive_seed(spec.seed, kDrift, static_cast<std::uint64_t>(t)));
      shift = gaussian(dim, spec.drift_scale * t / std::sqrt(static_cast<double>(dim)), drng);
    }
    Task task;
    task.task_id = t + 1;
    std::vector<SampleRef> test;
    Rng rng(derive_seed(spec.seed, kDraw, static_cast<std::uint64_t>(t)));
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_int_distribution<int> pick_mode(0, spec.modes_per_class - 1);
    for (int k = 0; k < spec.classes_per_task; ++k) {
      const int c = spec.domain_incremental ? k : t * spec.classes_per_task + k;
      task.class_set.insert(c);
      auto draw = [&]() {
        const Vec& mode = modes[static_cast<std::size_t>(c)]
                               [static_cast<std::size_t>(pick_mode(rng))];
        std::vector<float> f(dim);
        for (std::size_t d = 0; d < dim; ++d)
          f[d] = static_cast<float>(centers[static_cast<std::size_t>(c)][d] + mode[d] +
                                    shift[d] + noise(rng));
        return make_sample(next_id++, c, std::move(f), spec.sample_bytes);
      };
      for (int i = 0; i < spec.samples_per_class; ++i) task.samples.push_back(draw());
      for (int i = 0; i < spec.test_samples_per_class; ++i) test.push_back(draw());
    }
    Rng order(derive_seed(spec.seed, kOrder, static_cast<std::uint64_t>(t)));
    std::shuffle(task.samples.begin(), task.samples.end(), order);
    out.tasks.push_back(std::move(task));
    out.test_sets.push_back(std::move(test));
  }
  return out;
}

}  // namespace hemrt::harness
