#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "hemrt/learner.hpp"

using namespace hemrt;

namespace {

// Two well-separated clusters in 4-d.
std::vector<SampleRef> toy_two_class(int per_class, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<float> noise(0.0f, 0.3f);
  std::vector<SampleRef> out;
  SampleId id = 0;
  for (ClassId c : {0, 1})
    for (int i = 0; i < per_class; ++i) {
      std::vector<float> f(4);
      for (auto& v : f) v = (c == 0 ? -1.0f : 1.0f) + noise(rng);
      out.push_back(make_sample(id++, c, std::move(f), 16));
    }
  return out;
}

MlpClassifier make_mlp(std::size_t dim = 4, std::size_t hidden = 8, std::uint64_t seed = 3) {
  MlpClassifier m({dim, hidden, seed});
  const std::vector<ClassId> labels{0, 1};
  m.add_classes(labels);
  return m;
}

// Predicts from a fixed table keyed by sample id.
class TableLearner final : public Learner {
 public:
  explicit TableLearner(std::map<SampleId, ClassId> table, std::vector<ClassId> seen)
      : table_(std::move(table)), seen_(std::move(seen)) {}
  void add_classes(std::span<const ClassId>) override {}
  [[nodiscard]] std::vector<ClassId> classes_seen() const override { return seen_; }
  double train_epoch(std::span<const Batch>, double) override { return 0.0; }
  [[nodiscard]] ClassId predict(const Sample& s) const override { return table_.at(s.id); }
  [[nodiscard]] Checkpoint checkpoint() const override { return {}; }
  void restore(const Checkpoint&) override {}
  [[nodiscard]] std::unique_ptr<Learner> clone() const override {
    return std::make_unique<TableLearner>(*this);
  }

 private:
  std::map<SampleId, ClassId> table_;
  std::vector<ClassId> seen_;
};

}  // namespace

TEST(MlpTrain, LossDecreasesOnSeparableToy) {
  auto m = make_mlp();
  const auto data = toy_two_class(20, 1);
  const std::vector<Batch> batches{data};
  const double first = m.train_epoch(batches, 0.5);
  const double second = m.train_epoch(batches, 0.5);
  EXPECT_LT(second, first);
}

TEST(MlpTrain, ZeroLearningRateLeavesStateUnchanged) {
  auto m = make_mlp();
  const auto before = m.checkpoint();
  const auto data = toy_two_class(10, 2);
  Rng rng(1);
  m.train_epoch(make_batches(data, 4, rng), 0.0);
  EXPECT_EQ(m.checkpoint(), before);
}

TEST(MlpTrain, GradientMatchesCentralDifferences) {
  auto m = make_mlp(4, 5, 11);
  const std::vector<ClassId> more{2};
  m.add_classes(more);
  auto data = toy_two_class(2, 4);
  data.push_back(make_sample(99, 2, {0.3f, -0.2f, 0.5f, 0.1f}, 16));
  const Batch batch(data.begin(), data.end());
  ASSERT_EQ(batch.size(), 5u);

  const auto analytic = m.batch_gradient(batch);
  auto params = m.parameters();
  const double h = 1e-5;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    m.set_parameters(params);
    const double up = m.batch_loss(batch);
    params[i] = saved - h;
    m.set_parameters(params);
    const double down = m.batch_loss(batch);
    params[i] = saved;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-3});
    EXPECT_LE(std::abs(numeric - analytic[i]) / scale, 1e-4) << "param " << i;
  }
}

TEST(MlpTrain, DivergenceIsRaised) {
  auto m = make_mlp();
  const float nan = std::numeric_limits<float>::quiet_NaN();
  const std::vector<Batch> bad{{make_sample(0, 0, {nan, 0.0f, 0.0f, 0.0f}, 16)}};
  EXPECT_THROW(m.train_epoch(bad, 0.1), LearnerDivergence);
  EXPECT_THROW(m.train_epoch({}, 0.1), std::invalid_argument);
}

TEST(MlpTrain, HeadGrowsWithClassesAndIgnoresDuplicates) {
  MlpClassifier m({4, 8, 1});
  const std::vector<ClassId> a{5, 2, 5};
  m.add_classes(a);
  const std::vector<ClassId> b{2, 9};
  m.add_classes(b);
  EXPECT_EQ(m.classes_seen(), (std::vector<ClassId>{2, 5, 9}));
  EXPECT_EQ(m.parameters().size(), 8u * 4 + 8 + 3u * 8 + 3);
}

TEST(Evaluate, Examples) {
  const auto s = hemrt::testing::make_samples({0, 1}, 2);
  // Class 0 both right, class 1 one of two.
  TableLearner half({{0, 0}, {1, 0}, {2, 1}, {3, 0}}, {0, 1});
  const auto r = half.evaluate(s);
  EXPECT_DOUBLE_EQ(r.per_class.at(0), 1.0);
  EXPECT_DOUBLE_EQ(r.per_class.at(1), 0.5);
  EXPECT_DOUBLE_EQ(r.average, 0.75);

  TableLearner perfect({{0, 0}, {1, 0}, {2, 1}, {3, 1}}, {0, 1, 4});
  const auto p = perfect.evaluate(s);
  EXPECT_DOUBLE_EQ(p.average, 1.0);
  ASSERT_EQ(p.warnings.size(), 1u);  // class 4 has no test samples
}

TEST(Evaluate, UntrainedModelIsNearChance) {
  const int classes = 5;
  auto test = hemrt::testing::make_samples(hemrt::testing::class_range(0, classes), 400);
  // Random features so predictions carry no label information.
  Rng rng(8);
  std::normal_distribution<float> g;
  std::vector<SampleRef> noisy;
  for (const auto& s : test) {
    std::vector<float> f(4);
    for (auto& v : f) v = g(rng);
    noisy.push_back(make_sample(s->id, s->class_label, std::move(f), 16));
  }
  MlpClassifier m({4, 8, 2});
  const auto labels = hemrt::testing::class_range(0, classes);
  m.add_classes(labels);
  EXPECT_NEAR(m.evaluate(noisy).average, 1.0 / classes, 0.05);
}

TEST(Checkpoint, RoundTripAndDeterministicContinuation) {
  auto m = make_mlp();
  const auto data = toy_two_class(16, 6);
  Rng rng(1);
  m.train_epoch(make_batches(data, 8, rng), 0.2);
  const auto c1 = m.checkpoint();

  auto other = make_mlp(4, 8, 99);
  other.restore(c1);
  EXPECT_EQ(other.checkpoint(), c1);
  EXPECT_EQ(other.parameters(), m.parameters());

  Rng r1(5), r2(5);
  m.train_epoch(make_batches(data, 8, r1), 0.2);
  other.train_epoch(make_batches(data, 8, r2), 0.2);
  EXPECT_EQ(m.checkpoint(), other.checkpoint());
  EXPECT_NE(m.checkpoint(), c1);
  EXPECT_NE(fingerprint(m.checkpoint()), fingerprint(c1));

  MlpClassifier wrong({5, 8, 1});
  EXPECT_THROW(wrong.restore(c1), std::invalid_argument);
}

TEST(Checkpoint, CloneIsIndependent) {
  auto m = make_mlp();
  auto copy = m.clone();
  const auto before = copy->checkpoint();
  const auto data = toy_two_class(8, 3);
  const std::vector<Batch> batches{data};
  m.train_epoch(batches, 0.5);
  EXPECT_EQ(copy->checkpoint(), before);
}
