#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hemrt/domain.hpp"
#include "hemrt/memory_hierarchy.hpp"
#include "hemrt/random.hpp"

namespace hemrt {

// Background traffic: from `time_s` on, other programs consume
// `bytes_per_s` of the channel until the next point.
struct LoadPoint {
  double time_s = 0.0;
  double bytes_per_s = 0.0;
};

// FIFO storage channel on simulated time. Effective bandwidth is
// bandwidth - external load, floored at `min_effective_bytes_per_s`.
class IoChannel {
 public:
  explicit IoChannel(double bandwidth_bytes_per_s = 100e6,
                     double min_effective_bytes_per_s = 1.0);

  void set_external_load(std::vector<LoadPoint> trace);
  [[nodiscard]] const std::vector<LoadPoint>& external_load() const noexcept { return load_; }
  [[nodiscard]] double external_load_at(double t) const noexcept;
  [[nodiscard]] double effective_bandwidth_at(double t) const noexcept;
  [[nodiscard]] double bandwidth() const noexcept { return bandwidth_; }

  // Queues a transfer behind everything already scheduled and returns its
  // simulated completion time.
  double schedule(double now, double bytes);

  [[nodiscard]] double busy_until() const noexcept { return busy_until_; }
  // Seconds within [t0, t1) during which the channel was transferring.
  [[nodiscard]] double busy_seconds(double t0, double t1) const;

 private:
  double bandwidth_;
  double min_bw_;
  std::vector<LoadPoint> load_;
  double busy_until_ = 0.0;
  std::vector<std::pair<double, double>> busy_;  // merged, ascending
};

struct SwapSlot {
  SampleId sample_id = 0;
  ClassId class_label = 0;
};

struct SwapRequest {
  std::vector<SwapSlot> slots;
  double issue_time = 0.0;
  int issue_epoch = 0;
};

struct SwapCounters {
  std::uint64_t issued = 0;
  std::uint64_t applied = 0;
  std::uint64_t dropped = 0;
  std::uint64_t pending = 0;
};

// Asynchronous EM <-> archive swapping. Issue and apply are only called at
// epoch boundaries; training never waits on the channel.
class SwapEngine {
 public:
  explicit SwapEngine(IoChannel channel = IoChannel{});

  // Picks ceil(percent * |drawn|) distinct drawn EM samples uniformly at
  // random and queues one transfer of 2 * size_bytes (read replacement +
  // write-back) per slot. Empty `drawn` is a no-op.
  SwapRequest issue_swaps(std::span<const SampleRef> drawn, double percent, Rng& rng,
                          double now, int epoch);

  // Applies every transfer finished by `now`: the slot's sample is replaced
  // by a uniformly random same-class archive sample not resident in EM.
  // Stale slots and exhausted classes are dropped.
  std::size_t apply_completions(EpisodicMemory& em, const StorageArchive& archive,
                                double now, Rng& rng);

  // Serviced / issued for transfers issued in epochs [first, last];
  // std::nullopt when nothing was issued there.
  [[nodiscard]] std::optional<double> completion_rate(int first_epoch, int last_epoch) const;

  [[nodiscard]] bool queue_empty() const noexcept { return queue_.empty(); }
  [[nodiscard]] SwapCounters counters() const noexcept;
  [[nodiscard]] IoChannel& channel() noexcept { return channel_; }
  [[nodiscard]] const IoChannel& channel() const noexcept { return channel_; }

 private:
  struct Transfer {
    SwapSlot slot;
    double completion_time;
    int issue_epoch;
  };
  struct EpochStats {
    std::uint64_t issued = 0;
    std::uint64_t serviced = 0;
  };

  IoChannel channel_;
  std::deque<Transfer> queue_;
  std::map<int, EpochStats> per_epoch_;
  std::uint64_t issued_ = 0;
  std::uint64_t applied_ = 0;
  std::uint64_t dropped_ = 0;
};

// Steady bandwidth needed to replace every drawn EM sample once per epoch.
[[nodiscard]] double full_swap_bandwidth(std::int64_t em_drawn_per_epoch,
                                         std::uint32_t sample_bytes,
                                         double epoch_seconds);

}  // namespace hemrt
