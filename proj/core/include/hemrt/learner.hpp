#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hemrt/domain.hpp"
#include "hemrt/memory_hierarchy.hpp"
#include "hemrt/random.hpp"

namespace hemrt {

// Opaque, byte-exact snapshot of a learner's state.
struct Checkpoint {
  std::vector<std::uint8_t> bytes;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::uint64_t fingerprint(const Checkpoint& checkpoint) noexcept;

struct EvalResult {
  std::map<ClassId, double> per_class;
  // Macro average over classes with at least one test sample.
  double average = 0.0;
  std::vector<std::string> warnings;
};

// Raised when training produces a non-finite loss.
class LearnerDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Trainer plug-in boundary. Anything honoring these signatures can replace
// the reference classifier.
class Learner {
 public:
  virtual ~Learner() = default;

  // Extends the prediction head; labels already present are ignored.
  virtual void add_classes(std::span<const ClassId> labels) = 0;
  [[nodiscard]] virtual std::vector<ClassId> classes_seen() const = 0;

  // One pass over `batches`; returns the mean per-sample loss. Throws
  // LearnerDivergence on a non-finite loss.
  virtual double train_epoch(std::span<const Batch> batches, double learning_rate) = 0;
  [[nodiscard]] virtual ClassId predict(const Sample& sample) const = 0;

  [[nodiscard]] virtual Checkpoint checkpoint() const = 0;
  virtual void restore(const Checkpoint& checkpoint) = 0;
  [[nodiscard]] virtual std::unique_ptr<Learner> clone() const = 0;

  // Per-class and macro-averaged accuracy. Test classes never added to the
  // head score 0; seen classes with no test samples are skipped with a warning.
  [[nodiscard]] virtual EvalResult evaluate(std::span<const SampleRef> test) const;
};

struct MlpConfig {
  std::size_t input_dim = 32;
  std::size_t hidden = 32;
  std::uint64_t seed = 1;
};

// One-hidden-layer tanh network with a softmax head that grows as classes
// arrive, trained by mini-batch gradient descent on mean cross-entropy.
class MlpClassifier final : public Learner {
 public:
  explicit MlpClassifier(MlpConfig config);

  void add_classes(std::span<const ClassId> labels) override;
  [[nodiscard]] std::vector<ClassId> classes_seen() const override { return labels_; }
  double train_epoch(std::span<const Batch> batches, double learning_rate) override;
  [[nodiscard]] ClassId predict(const Sample& sample) const override;
  [[nodiscard]] Checkpoint checkpoint() const override;
  void restore(const Checkpoint& checkpoint) override;
  [[nodiscard]] std::unique_ptr<Learner> clone() const override;

  // Flattened parameters: W1 (hidden x input), b1, W2 (classes x hidden), b2.
  [[nodiscard]] std::vector<double> parameters() const;
  void set_parameters(std::span<const double> params);
  [[nodiscard]] double batch_loss(const Batch& batch) const;
  // Gradient of batch_loss w.r.t. parameters(), same layout.
  [[nodiscard]] std::vector<double> batch_gradient(const Batch& batch) const;

  [[nodiscard]] const MlpConfig& config() const noexcept { return config_; }

 private:
  struct Grads;
  double accumulate(const Batch& batch, Grads* grads) const;
  [[nodiscard]] std::size_t row_of(ClassId label) const;
  [[nodiscard]] std::size_t num_classes() const noexcept { return labels_.size(); }

  MlpConfig config_;
  std::vector<double> w1_, b1_, w2_, b2_;
  std::vector<ClassId> labels_;            // head row -> label
  std::map<ClassId, std::size_t> row_;     // label -> head row
  Rng rng_;
};

}  // namespace hemrt
