#include "hemrt/swap_engine.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <stdexcept>

namespace hemrt {

// ---- IoChannel --------------------------------------------------------------

IoChannel::IoChannel(double bandwidth_bytes_per_s, double min_effective_bytes_per_s)
    : bandwidth_(bandwidth_bytes_per_s), min_bw_(min_effective_bytes_per_s) {
  if (!(bandwidth_bytes_per_s > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (!(min_effective_bytes_per_s > 0.0))
    throw std::invalid_argument("minimum effective bandwidth must be positive");
}

void IoChannel::set_external_load(std::vector<LoadPoint> trace) {
  for (const auto& p : trace)
    if (p.bytes_per_s < 0.0) throw std::invalid_argument("external load must be non-negative");
  std::stable_sort(trace.begin(), trace.end(),
                   [](const LoadPoint& a, const LoadPoint& b) { return a.time_s < b.time_s; });
  load_ = std::move(trace);
}

double IoChannel::external_load_at(double t) const noexcept {
  double load = 0.0;
  for (const auto& p : load_) {
    if (p.time_s > t) break;
    load = p.bytes_per_s;
  }
  return load;
}

double IoChannel::effective_bandwidth_at(double t) const noexcept {
  return std::max(bandwidth_ - external_load_at(t), min_bw_);
}

double IoChannel::schedule(double now, double bytes) {
  if (bytes < 0.0) throw std::invalid_argument("transfer size must be non-negative");
  const double start = std::max(now, busy_until_);
  double t = start;
  double remaining = bytes;
  while (remaining > 0.0) {
    double segment_end = std::numeric_limits<double>::infinity();
    for (const auto& p : load_) {
      if (p.time_s > t) {
        segment_end = p.time_s;
        break;
      }
    }
    const double bw = effective_bandwidth_at(t);
    const double can_move = bw * (segment_end - t);
    if (remaining <= can_move) {
      t += remaining / bw;
      remaining = 0.0;
    } else {
      remaining -= can_move;
      t = segment_end;
    }
  }
  busy_until_ = t;
  if (t > start) {
    if (!busy_.empty() && busy_.back().second >= start)
      busy_.back().second = t;
    else
      busy_.emplace_back(start, t);
  }
  return t;
}

double IoChannel::busy_seconds(double t0, double t1) const {
  if (t1 <= t0) return 0.0;
  double total = 0.0;
  for (const auto& [a, b] : busy_) {
    if (b <= t0) continue;
    if (a >= t1) break;
    total += std::min(b, t1) - std::max(a, t0);
  }
  return total;
}

// ---- SwapEngine -------------------------------------------------------------

SwapEngine::SwapEngine(IoChannel channel) : channel_(std::move(channel)) {}

SwapRequest SwapEngine::issue_swaps(std::span<const SampleRef> drawn, double percent,
                                    Rng& rng, double now, int epoch) {
  if (!(percent > 0.0) || percent > 1.0)
    throw std::invalid_argument("swap percent must be in (0, 1]");
  SwapRequest request;
  request.issue_time = now;
  request.issue_epoch = epoch;
  if (drawn.empty()) return request;

  // Guard against products like 0.3 * 10 landing a hair above an integer.
  const double raw = percent * static_cast<double>(drawn.size());
  auto count = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  count = std::clamp<std::size_t>(count, 1, drawn.size());

  std::vector<SampleRef> chosen;
  chosen.reserve(count);
  std::sample(drawn.begin(), drawn.end(), std::back_inserter(chosen), count, rng);

  auto& stats = per_epoch_[epoch];
  for (const SampleRef& s : chosen) {
    const SwapSlot slot{s->id, s->class_label};
    const double done = channel_.schedule(now, 2.0 * static_cast<double>(s->size_bytes));
    queue_.push_back({slot, done, epoch});
    request.slots.push_back(slot);
    ++stats.issued;
    ++issued_;
  }
  return request;
}

std::size_t SwapEngine::apply_completions(EpisodicMemory& em, const StorageArchive& archive,
                                          double now, Rng& rng) {
  std::size_t applied = 0;
  while (!queue_.empty() && queue_.front().completion_time <= now) {
    const Transfer t = queue_.front();
    queue_.pop_front();
    ++per_epoch_[t.issue_epoch].serviced;

    if (!em.contains(t.slot.sample_id)) {
      ++dropped_;
      continue;
    }
    const auto& pool = archive.class_samples(t.slot.class_label);
    std::vector<const SampleRef*> candidates;
    candidates.reserve(pool.size());
    for (const SampleRef& s : pool)
      if (!em.contains(s->id)) candidates.push_back(&s);
    if (candidates.empty()) {
      ++dropped_;
      continue;
    }
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    em.replace(t.slot.sample_id, *candidates[pick(rng)]);
    ++applied_;
    ++applied;
  }
  return applied;
}

std::optional<double> SwapEngine::completion_rate(int first_epoch, int last_epoch) const {
  std::uint64_t issued = 0;
  std::uint64_t serviced = 0;
  for (auto it = per_epoch_.lower_bound(first_epoch);
       it != per_epoch_.end() && it->first <= last_epoch; ++it) {
    issued += it->second.issued;
    serviced += it->second.serviced;
  }
  if (issued == 0) return std::nullopt;
  return static_cast<double>(serviced) / static_cast<double>(issued);
}

SwapCounters SwapEngine::counters() const noexcept {
  return {issued_, applied_, dropped_, static_cast<std::uint64_t>(queue_.size())};
}

double full_swap_bandwidth(std::int64_t em_drawn_per_epoch, std::uint32_t sample_bytes,
                           double epoch_seconds) {
  if (!(epoch_seconds > 0.0)) throw std::invalid_argument("epoch duration must be positive");
  return static_cast<double>(em_drawn_per_epoch) * 2.0 * static_cast<double>(sample_bytes) /
         epoch_seconds;
}

}  // namespace hemrt
