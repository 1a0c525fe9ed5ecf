#include "hemrt/learner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include <fmt/format.h>

namespace hemrt {

namespace {

class ByteWriter {
 public:
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64s(const std::vector<double>& v) {
    u64(v.size());
    for (double d : v) u64(std::bit_cast<std::uint64_t>(d));
  }
  void str(const std::string& s) {
    u64(s.size());
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& b) : b_(b) {}
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  std::vector<double> f64s() {
    std::vector<double> v(u64());
    for (double& d : v) d = std::bit_cast<double>(u64());
    return v;
  }
  std::string str() {
    const auto n = u64();
    need(n);
    std::string s(b_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  b_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw std::invalid_argument("truncated checkpoint");
  }
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fingerprint(const Checkpoint& checkpoint) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : checkpoint.bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

EvalResult Learner::evaluate(std::span<const SampleRef> test) const {
  std::map<ClassId, std::pair<std::size_t, std::size_t>> tally;  // correct, total
  for (const SampleRef& s : test) {
    auto& [correct, total] = tally[s->class_label];
    ++total;
    if (predict(*s) == s->class_label) ++correct;
  }
  EvalResult result;
  for (ClassId c : classes_seen()) {
    if (!tally.contains(c))
      result.warnings.push_back(fmt::format("class {} has no test samples; excluded", c));
  }
  double sum = 0.0;
  for (const auto& [c, counts] : tally) {
    const double acc = static_cast<double>(counts.first) / static_cast<double>(counts.second);
    result.per_class[c] = acc;
    sum += acc;
  }
  result.average = tally.empty() ? 0.0 : sum / static_cast<double>(tally.size());
  return result;
}

// ---- MlpClassifier ----------------------------------------------------------

struct MlpClassifier::Grads {
  std::vector<double> w1, b1, w2, b2;
};

MlpClassifier::MlpClassifier(MlpConfig config) : config_(config), rng_(config.seed) {
  if (config.input_dim == 0 || config.hidden == 0)
    throw std::invalid_argument("MLP dimensions must be positive");
  const std::size_t d = config.input_dim;
  const std::size_t h = config.hidden;
  w1_.resize(h * d);
  b1_.assign(h, 0.0);
  const double limit = std::sqrt(6.0 / static_cast<double>(d + h));
  std::uniform_real_distribution<double> init(-limit, limit);
  for (double& w : w1_) w = init(rng_);
}

void MlpClassifier::add_classes(std::span<const ClassId> labels) {
  std::vector<ClassId> fresh;
  for (ClassId c : labels)
    if (!row_.contains(c)) fresh.push_back(c);
  std::sort(fresh.begin(), fresh.end());
  fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());

  const std::size_t h = config_.hidden;
  const double limit = std::sqrt(6.0 / static_cast<double>(h + 1));
  std::uniform_real_distribution<double> init(-limit, limit);
  for (ClassId c : fresh) {
    row_[c] = labels_.size();
    labels_.push_back(c);
    for (std::size_t j = 0; j < h; ++j) w2_.push_back(init(rng_));
    b2_.push_back(0.0);
  }
}

std::size_t MlpClassifier::row_of(ClassId label) const {
  auto it = row_.find(label);
  if (it == row_.end())
    throw std::invalid_argument(fmt::format("label {} is not in the prediction head", label));
  return it->second;
}

double MlpClassifier::accumulate(const Batch& batch, Grads* grads) const {
  const std::size_t d = config_.input_dim;
  const std::size_t h = config_.hidden;
  const std::size_t k = num_classes();
  if (k == 0) throw std::logic_error("prediction head has no classes");

  std::vector<double> x(d), act(h), logits(k), dact(h);
  double loss = 0.0;
  for (const SampleRef& s : batch) {
    if (s->features.size() != d)
      throw std::invalid_argument("sample dimensionality does not match the model");
    const std::size_t y = row_of(s->class_label);
    for (std::size_t i = 0; i < d; ++i) x[i] = s->features[i];

    for (std::size_t j = 0; j < h; ++j) {
      const double* w = &w1_[j * d];
      double z = b1_[j];
      for (std::size_t i = 0; i < d; ++i) z += w[i] * x[i];
      act[j] = std::tanh(z);
    }
    double top = -INFINITY;
    for (std::size_t c = 0; c < k; ++c) {
      const double* w = &w2_[c * h];
      double z = b2_[c];
      for (std::size_t j = 0; j < h; ++j) z += w[j] * act[j];
      logits[c] = z;
      top = std::max(top, z);
    }
    double norm = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      logits[c] = std::exp(logits[c] - top);
      norm += logits[c];
    }
    loss += -std::log(logits[y] / norm);
    if (!grads) continue;

    std::fill(dact.begin(), dact.end(), 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      const double g = logits[c] / norm - (c == y ? 1.0 : 0.0);
      const double* w = &w2_[c * h];
      double* gw = &grads->w2[c * h];
      for (std::size_t j = 0; j < h; ++j) {
        gw[j] += g * act[j];
        dact[j] += g * w[j];
      }
      grads->b2[c] += g;
    }
    for (std::size_t j = 0; j < h; ++j) {
      const double g = dact[j] * (1.0 - act[j] * act[j]);
      double* gw = &grads->w1[j * d];
      for (std::size_t i = 0; i < d; ++i) gw[i] += g * x[i];
      grads->b1[j] += g;
    }
  }
  return loss;
}

double MlpClassifier::train_epoch(std::span<const Batch> batches, double learning_rate) {
  if (batches.empty()) throw std::invalid_argument("train_epoch needs at least one batch");
  Grads g{std::vector<double>(w1_.size()), std::vector<double>(b1_.size()),
          std::vector<double>(w2_.size()), std::vector<double>(b2_.size())};
  double loss_sum = 0.0;
  std::size_t n = 0;
  for (const Batch& batch : batches) {
    if (batch.empty()) continue;
    std::fill(g.w1.begin(), g.w1.end(), 0.0);
    std::fill(g.b1.begin(), g.b1.end(), 0.0);
    std::fill(g.w2.begin(), g.w2.end(), 0.0);
    std::fill(g.b2.begin(), g.b2.end(), 0.0);
    const double batch_loss = accumulate(batch, &g);
    if (!std::isfinite(batch_loss))
      throw LearnerDivergence(fmt::format("non-finite loss {} after {} samples", batch_loss, n));
    loss_sum += batch_loss;
    n += batch.size();
    const double step = learning_rate / static_cast<double>(batch.size());
    auto apply = [step](std::vector<double>& p, const std::vector<double>& grad) {
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= step * grad[i];
    };
    apply(w1_, g.w1);
    apply(b1_, g.b1);
    apply(w2_, g.w2);
    apply(b2_, g.b2);
  }
  if (n == 0) throw std::invalid_argument("train_epoch got only empty batches");
  return loss_sum / static_cast<double>(n);
}

ClassId MlpClassifier::predict(const Sample& sample) const {
  const std::size_t d = config_.input_dim;
  const std::size_t h = config_.hidden;
  if (labels_.empty()) throw std::logic_error("prediction head has no classes");
  std::vector<double> act(h);
  for (std::size_t j = 0; j < h; ++j) {
    const double* w = &w1_[j * d];
    double z = b1_[j];
    for (std::size_t i = 0; i < d; ++i) z += w[i] * sample.features[i];
    act[j] = std::tanh(z);
  }
  std::size_t best = 0;
  double best_z = -INFINITY;
  for (std::size_t c = 0; c < labels_.size(); ++c) {
    const double* w = &w2_[c * h];
    double z = b2_[c];
    for (std::size_t j = 0; j < h; ++j) z += w[j] * act[j];
    if (z > best_z) {
      best_z = z;
      best = c;
    }
  }
  return labels_[best];
}

Checkpoint MlpClassifier::checkpoint() const {
  ByteWriter w;
  w.u64(config_.input_dim);
  w.u64(config_.hidden);
  w.u64(config_.seed);
  w.u64(labels_.size());
  for (ClassId c : labels_) w.u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(c)));
  w.f64s(w1_);
  w.f64s(b1_);
  w.f64s(w2_);
  w.f64s(b2_);
  std::ostringstream rng_state;
  rng_state << rng_;
  w.str(rng_state.str());
  return {w.take()};
}

void MlpClassifier::restore(const Checkpoint& checkpoint) {
  ByteReader r(checkpoint.bytes);
  MlpConfig cfg;
  cfg.input_dim = r.u64();
  cfg.hidden = r.u64();
  cfg.seed = r.u64();
  if (cfg.input_dim != config_.input_dim || cfg.hidden != config_.hidden)
    throw std::invalid_argument("checkpoint shape does not match this model");
  std::vector<ClassId> labels(r.u64());
  for (ClassId& c : labels) c = static_cast<ClassId>(static_cast<std::int64_t>(r.u64()));
  auto w1 = r.f64s(), b1 = r.f64s(), w2 = r.f64s(), b2 = r.f64s();
  std::istringstream rng_state(r.str());
  Rng rng;
  rng_state >> rng;

  config_ = cfg;
  labels_ = std::move(labels);
  row_.clear();
  for (std::size_t i = 0; i < labels_.size(); ++i) row_[labels_[i]] = i;
  w1_ = std::move(w1);
  b1_ = std::move(b1);
  w2_ = std::move(w2);
  b2_ = std::move(b2);
  rng_ = rng;
}

std::unique_ptr<Learner> MlpClassifier::clone() const {
  return std::make_unique<MlpClassifier>(*this);
}

std::vector<double> MlpClassifier::parameters() const {
  std::vector<double> p;
  p.reserve(w1_.size() + b1_.size() + w2_.size() + b2_.size());
  p.insert(p.end(), w1_.begin(), w1_.end());
  p.insert(p.end(), b1_.begin(), b1_.end());
  p.insert(p.end(), w2_.begin(), w2_.end());
  p.insert(p.end(), b2_.begin(), b2_.end());
  return p;
}

void MlpClassifier::set_parameters(std::span<const double> params) {
  if (params.size() != w1_.size() + b1_.size() + w2_.size() + b2_.size())
    throw std::invalid_argument("parameter vector has the wrong length");
  auto it = params.begin();
  for (auto* v : {&w1_, &b1_, &w2_, &b2_}) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(v->size()), v->begin());
    it += static_cast<std::ptrdiff_t>(v->size());
  }
}

double MlpClassifier::batch_loss(const Batch& batch) const {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  return accumulate(batch, nullptr) / static_cast<double>(batch.size());
}

std::vector<double> MlpClassifier::batch_gradient(const Batch& batch) const {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  Grads g{std::vector<double>(w1_.size()), std::vector<double>(b1_.size()),
          std::vector<double>(w2_.size()), std::vector<double>(b2_.size())};
  accumulate(batch, &g);
  std::vector<double> out;
  out.reserve(w1_.size() + b1_.size() + w2_.size() + b2_.size());
  for (const auto* v : {&g.w1, &g.b1, &g.w2, &g.b2}) out.insert(out.end(), v->begin(), v->end());
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (double& x : out) x *= scale;
  return out;
}

}  // namespace hemrt
