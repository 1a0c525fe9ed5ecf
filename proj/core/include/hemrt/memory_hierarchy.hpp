#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "hemrt/domain.hpp"
#include "hemrt/random.hpp"

namespace hemrt {

// Per-class sample quotas for a class-balanced store: capacity / |classes|
// each, with the remainder handed to the lowest class ids.
std::map<ClassId, std::int64_t> balanced_quotas(std::int64_t capacity,
                                                std::span<const ClassId> classes);

// In-storage archive of every sample seen so far, grouped by class in
// arrival order. Optionally capped, in which case it is kept class-balanced.
class StorageArchive {
 public:
  StorageArchive() = default;
  explicit StorageArchive(std::optional<std::int64_t> capacity_samples)
      : capacity_(capacity_samples) {}

  // Adds samples whose id is not archived yet; returns how many were added.
  std::size_t append(std::span<const SampleRef> samples);
  // Evicts uniformly at random from over-quota classes until the archive fits
  // its cap. No-op when uncapped. Returns the number evicted.
  std::size_t enforce_capacity(Rng& rng);

  [[nodiscard]] bool contains(SampleId id) const { return ids_.contains(id); }
  [[nodiscard]] const std::vector<SampleRef>& class_samples(ClassId c) const;
  [[nodiscard]] std::vector<ClassId> classes() const;
  [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
  [[nodiscard]] std::size_t class_size(ClassId c) const {
    return class_samples(c).size();
  }
  [[nodiscard]] std::optional<std::int64_t> capacity() const noexcept {
    return capacity_;
  }
  [[nodiscard]] const std::map<ClassId, std::vector<SampleRef>>& per_class() const noexcept {
    return per_class_;
  }

 private:
  std::optional<std::int64_t> capacity_;
  std::map<ClassId, std::vector<SampleRef>> per_class_;
  std::unordered_set<SampleId> ids_;
};

// Staging area for the current task. Samples beyond capacity are recorded as
// overflow: they are archived at flush and not trained on directly.
class StreamBuffer {
 public:
  StreamBuffer() = default;
  explicit StreamBuffer(std::int64_t capacity);

  [[nodiscard]] std::int64_t capacity() const noexcept { return capacity_; }
  [[nodiscard]] const std::vector<SampleRef>& contents() const noexcept { return contents_; }
  [[nodiscard]] const std::vector<SampleRef>& overflow() const noexcept { return overflow_; }
  [[nodiscard]] std::size_t size() const noexcept { return contents_.size(); }
  [[nodiscard]] bool empty() const noexcept {
    return contents_.empty() && overflow_.empty();
  }

  // Shrinking moves the tail of contents back to the front of overflow;
  // growing pulls from overflow in task order.
  void resize(std::int64_t new_capacity);
  void clear() noexcept;

 private:
  friend void buffer_stream(const Task&, StreamBuffer&, StorageArchive&);
  std::int64_t capacity_ = 0;
  std::vector<SampleRef> contents_;
  std::vector<SampleRef> overflow_;
};

// Class-balanced in-memory replay store.
class EpisodicMemory {
 public:
  EpisodicMemory() = default;
  explicit EpisodicMemory(std::int64_t capacity);

  [[nodiscard]] std::int64_t capacity() const noexcept { return capacity_; }
  [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
  [[nodiscard]] bool contains(SampleId id) const { return ids_.contains(id); }
  [[nodiscard]] std::size_t class_count(ClassId c) const;
  [[nodiscard]] std::vector<ClassId> classes() const;
  [[nodiscard]] const std::map<ClassId, std::vector<SampleRef>>& slots() const noexcept {
    return per_class_;
  }
  // All samples, ordered by class id then slot.
  [[nodiscard]] std::vector<SampleRef> samples() const;
  // max - min per-class count over classes present; 0 when empty.
  [[nodiscard]] std::int64_t class_spread() const;

  // Puts `replacement` into the slot occupied by `evicted`. Both must share a
  // class and the replacement must not already be resident. Returns false if
  // `evicted` is no longer resident.
  bool replace(SampleId evicted, SampleRef replacement);

 private:
  friend struct EmRebalancer;
  std::int64_t capacity_ = 0;
  std::map<ClassId, std::vector<SampleRef>> per_class_;
  std::unordered_set<SampleId> ids_;
};

struct RebalanceReport {
  std::size_t evicted = 0;
  std::size_t admitted = 0;
};

struct FlushReport {
  std::size_t archived = 0;
  std::size_t archive_evicted = 0;
  RebalanceReport em;
  std::size_t classes_seen = 0;
};

// Fills SB with the first `capacity` task samples; the remainder is kept as
// overflow and reaches the archive at flush, so replay views built while the
// task trains only ever contain old classes. SB must be empty.
void buffer_stream(const Task& task, StreamBuffer& sb, StorageArchive& archive);

// End-of-task flush: archive every task sample, re-balance EM over all
// classes seen, clear SB.
FlushReport flush(const Task& task, StreamBuffer& sb, EpisodicMemory& em,
                  StorageArchive& archive, Rng& rng);

// Sets EM capacity and re-balances: over-quota classes evict uniformly at
// random, under-quota classes refill from the archive up to availability.
RebalanceReport resize(EpisodicMemory& em, std::int64_t new_capacity,
                       const StorageArchive& archive, Rng& rng);
void resize(StreamBuffer& sb, std::int64_t new_capacity);

// Non-mutating class-balanced selection of `n` old samples as if EM were
// resized to `n`: resident samples are preferred (masking), the archive
// tops up classes that would grow.
std::vector<SampleRef> masked_em_view(const EpisodicMemory& em,
                                      const StorageArchive& archive,
                                      std::int64_t n, Rng& rng);

using Batch = std::vector<SampleRef>;

struct EpochBatches {
  std::vector<Batch> batches;
  // EM samples drawn by this epoch's training; candidates for swapping.
  std::vector<SampleRef> drawn_em;
};

// Random permutation of SB ∪ EM chunked into batches of `batch_size` (last
// batch may be short). Throws std::invalid_argument if the union is empty or
// batch_size < 1.
EpochBatches compose_epoch_batches(const StreamBuffer& sb, const EpisodicMemory& em,
                                   std::size_t batch_size, Rng& rng);

// Same permutation/chunking for an arbitrary pool.
std::vector<Batch> make_batches(std::vector<SampleRef> pool, std::size_t batch_size,
                                Rng& rng);

}  // namespace hemrt
