#include "hemrt/memory_hierarchy.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>

#include <fmt/format.h>

namespace hemrt {

namespace {

const std::vector<SampleRef> kNoSamples;

// Uniform random subset of size k, preserving relative order.
std::vector<SampleRef> sample_subset(const std::vector<SampleRef>& from,
                                     std::size_t k, Rng& rng) {
  std::vector<SampleRef> out;
  out.reserve(std::min(k, from.size()));
  std::sample(from.begin(), from.end(), std::back_inserter(out), k, rng);
  return out;
}

std::vector<ClassId> union_classes(const std::map<ClassId, std::vector<SampleRef>>& a,
                                   const std::map<ClassId, std::vector<SampleRef>>& b) {
  std::set<ClassId> all;
  for (const auto& [c, v] : a) all.insert(c);
  for (const auto& [c, v] : b) all.insert(c);
  return {all.begin(), all.end()};
}

std::vector<SampleRef> archived_not_resident(const std::vector<SampleRef>& archived,
                                             const std::unordered_set<SampleId>& resident) {
  std::vector<SampleRef> out;
  out.reserve(archived.size());
  for (const SampleRef& s : archived)
    if (!resident.contains(s->id)) out.push_back(s);
  return out;
}

std::int64_t availability(const std::vector<SampleRef>& resident,
                          const StorageArchive& archive, ClassId c) {
  std::int64_t n = static_cast<std::int64_t>(archive.class_size(c));
  for (const SampleRef& s : resident)
    if (!archive.contains(s->id)) ++n;
  return n;
}

}  // namespace

std::map<ClassId, std::int64_t> balanced_quotas(std::int64_t capacity,
                                                std::span<const ClassId> classes) {
  if (capacity < 0) throw std::invalid_argument("capacity must be non-negative");
  std::vector<ClassId> sorted(classes.begin(), classes.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::map<ClassId, std::int64_t> quotas;
  if (sorted.empty()) return quotas;
  const auto n = static_cast<std::int64_t>(sorted.size());
  const std::int64_t base = capacity / n;
  const std::int64_t remainder = capacity % n;
  for (std::int64_t i = 0; i < n; ++i)
    quotas[sorted[static_cast<std::size_t>(i)]] = base + (i < remainder ? 1 : 0);
  return quotas;
}

// ---- StorageArchive ---------------------------------------------------------

std::size_t StorageArchive::append(std::span<const SampleRef> samples) {
  std::size_t added = 0;
  for (const SampleRef& s : samples) {
    if (!ids_.insert(s->id).second) continue;
    per_class_[s->class_label].push_back(s);
    ++added;
  }
  return added;
}

std::size_t StorageArchive::enforce_capacity(Rng& rng) {
  if (!capacity_ || static_cast<std::int64_t>(size()) <= *capacity_) return 0;
  const auto cls = classes();
  const auto quotas = balanced_quotas(*capacity_, cls);
  std::size_t evicted = 0;
  for (auto& [c, members] : per_class_) {
    const auto quota = static_cast<std::size_t>(quotas.at(c));
    if (members.size() <= quota) continue;
    auto keep = sample_subset(members, quota, rng);
    std::unordered_set<SampleId> kept;
    for (const auto& s : keep) kept.insert(s->id);
    for (const auto& s : members) {
      if (!kept.contains(s->id)) {
        ids_.erase(s->id);
        ++evicted;
      }
    }
    members = std::move(keep);
  }
  return evicted;
}

const std::vector<SampleRef>& StorageArchive::class_samples(ClassId c) const {
  auto it = per_class_.find(c);
  return it == per_class_.end() ? kNoSamples : it->second;
}

std::vector<ClassId> StorageArchive::classes() const {
  std::vector<ClassId> out;
  out.reserve(per_class_.size());
  for (const auto& [c, v] : per_class_) out.push_back(c);
  return out;
}

// ---- StreamBuffer -----------------------------------------------------------

StreamBuffer::StreamBuffer(std::int64_t capacity) : capacity_(capacity) {
  if (capacity < 0) throw std::invalid_argument("SB capacity must be non-negative");
}

void StreamBuffer::resize(std::int64_t new_capacity) {
  if (new_capacity < 0) throw std::invalid_argument("SB capacity must be non-negative");
  capacity_ = new_capacity;
  const auto cap = static_cast<std::size_t>(new_capacity);
  if (contents_.size() > cap) {
    overflow_.insert(overflow_.begin(), contents_.begin() + static_cast<std::ptrdiff_t>(cap),
                     contents_.end());
    contents_.resize(cap);
  } else if (contents_.size() < cap && !overflow_.empty()) {
    const std::size_t take = std::min(cap - contents_.size(), overflow_.size());
    contents_.insert(contents_.end(), overflow_.begin(),
                     overflow_.begin() + static_cast<std::ptrdiff_t>(take));
    overflow_.erase(overflow_.begin(), overflow_.begin() + static_cast<std::ptrdiff_t>(take));
  }
}

void StreamBuffer::clear() noexcept {
  contents_.clear();
  overflow_.clear();
}

// ---- EpisodicMemory ---------------------------------------------------------

EpisodicMemory::EpisodicMemory(std::int64_t capacity) : capacity_(capacity) {
  if (capacity < 0) throw std::invalid_argument("EM capacity must be non-negative");
}

std::size_t EpisodicMemory::class_count(ClassId c) const {
  auto it = per_class_.find(c);
  return it == per_class_.end() ? 0 : it->second.size();
}

std::vector<ClassId> EpisodicMemory::classes() const {
  std::vector<ClassId> out;
  for (const auto& [c, v] : per_class_)
    if (!v.empty()) out.push_back(c);
  return out;
}

std::vector<SampleRef> EpisodicMemory::samples() const {
  std::vector<SampleRef> out;
  out.reserve(size());
  for (const auto& [c, v] : per_class_) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::int64_t EpisodicMemory::class_spread() const {
  std::size_t lo = SIZE_MAX, hi = 0;
  for (const auto& [c, v] : per_class_) {
    if (v.empty()) continue;
    lo = std::min(lo, v.size());
    hi = std::max(hi, v.size());
  }
  return hi == 0 ? 0 : static_cast<std::int64_t>(hi - lo);
}

bool EpisodicMemory::replace(SampleId evicted, SampleRef replacement) {
  if (!ids_.contains(evicted)) return false;
  if (ids_.contains(replacement->id))
    throw std::logic_error(fmt::format("sample {} is already resident", replacement->id));
  auto cls = per_class_.find(replacement->class_label);
  if (cls == per_class_.end())
    throw std::logic_error("replacement must belong to the evicted sample's class");
  auto it = std::find_if(cls->second.begin(), cls->second.end(),
                         [&](const SampleRef& s) { return s->id == evicted; });
  if (it == cls->second.end())
    throw std::logic_error("replacement must belong to the evicted sample's class");
  ids_.erase(evicted);
  ids_.insert(replacement->id);
  *it = std::move(replacement);
  return true;
}

struct EmRebalancer {
  static RebalanceReport run(EpisodicMemory& em, std::int64_t capacity,
                             const StorageArchive& archive, Rng& rng) {
    if (capacity < 0) throw std::invalid_argument("EM capacity must be non-negative");
    em.capacity_ = capacity;
    RebalanceReport report;
    const auto cls = union_classes(archive.per_class(), em.per_class_);
    const auto quotas = balanced_quotas(capacity, cls);
    for (ClassId c : cls) {
      auto& resident = em.per_class_[c];
      const std::int64_t target =
          std::min(quotas.at(c), availability(resident, archive, c));
      const auto want = static_cast<std::size_t>(target);
      if (resident.size() > want) {
        auto keep = sample_subset(resident, want, rng);
        report.evicted += resident.size() - keep.size();
        for (const auto& s : resident) em.ids_.erase(s->id);
        for (const auto& s : keep) em.ids_.insert(s->id);
        resident = std::move(keep);
      } else if (resident.size() < want) {
        auto candidates = archived_not_resident(archive.class_samples(c), em.ids_);
        auto admitted = sample_subset(candidates, want - resident.size(), rng);
        report.admitted += admitted.size();
        for (auto& s : admitted) {
          em.ids_.insert(s->id);
          resident.push_back(std::move(s));
        }
      }
      if (resident.empty()) em.per_class_.erase(c);
    }
    return report;
  }
};

// ---- stage operations -------------------------------------------------------

void buffer_stream(const Task& task, StreamBuffer& sb, StorageArchive& archive) {
  if (!sb.empty())
    throw std::logic_error("stream buffer must be empty at task start");
  const auto cap = static_cast<std::size_t>(sb.capacity());
  const std::size_t fit = std::min(cap, task.samples.size());
  sb.contents_.assign(task.samples.begin(),
                      task.samples.begin() + static_cast<std::ptrdiff_t>(fit));
  sb.overflow_.assign(task.samples.begin() + static_cast<std::ptrdiff_t>(fit),
                      task.samples.end());
  (void)archive;
}

FlushReport flush(const Task& task, StreamBuffer& sb, EpisodicMemory& em,
                  StorageArchive& archive, Rng& rng) {
  FlushReport report;
  report.archived = archive.append(task.samples);
  report.archived += archive.append(sb.contents());
  report.archived += archive.append(sb.overflow());
  report.archive_evicted = archive.enforce_capacity(rng);
  report.em = EmRebalancer::run(em, em.capacity(), archive, rng);
  report.classes_seen = archive.per_class().size();
  sb.clear();
  return report;
}

RebalanceReport resize(EpisodicMemory& em, std::int64_t new_capacity,
                       const StorageArchive& archive, Rng& rng) {
  return EmRebalancer::run(em, new_capacity, archive, rng);
}

void resize(StreamBuffer& sb, std::int64_t new_capacity) { sb.resize(new_capacity); }

std::vector<SampleRef> masked_em_view(const EpisodicMemory& em,
                                      const StorageArchive& archive,
                                      std::int64_t n, Rng& rng) {
  if (n < 0) throw std::invalid_argument("view size must be non-negative");
  std::unordered_set<SampleId> resident_ids;
  for (const auto& s : em.samples()) resident_ids.insert(s->id);

  std::vector<SampleRef> view;
  const auto cls = union_classes(archive.per_class(), em.slots());
  const auto quotas = balanced_quotas(n, cls);
  for (ClassId c : cls) {
    const auto it = em.slots().find(c);
    const std::vector<SampleRef>& resident = it == em.slots().end() ? kNoSamples : it->second;
    const auto want =
        static_cast<std::size_t>(std::min(quotas.at(c), availability(resident, archive, c)));
    if (want <= resident.size()) {
      auto part = sample_subset(resident, want, rng);
      view.insert(view.end(), part.begin(), part.end());
    } else {
      view.insert(view.end(), resident.begin(), resident.end());
      auto candidates = archived_not_resident(archive.class_samples(c), resident_ids);
      auto extra = sample_subset(candidates, want - resident.size(), rng);
      view.insert(view.end(), extra.begin(), extra.end());
    }
  }
  return view;
}

std::vector<Batch> make_batches(std::vector<SampleRef> pool, std::size_t batch_size,
                                Rng& rng) {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (pool.empty()) throw std::invalid_argument("cannot batch an empty sample pool");
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<Batch> batches;
  batches.reserve((pool.size() + batch_size - 1) / batch_size);
  for (std::size_t i = 0; i < pool.size(); i += batch_size) {
    const std::size_t end = std::min(pool.size(), i + batch_size);
    batches.emplace_back(pool.begin() + static_cast<std::ptrdiff_t>(i),
                         pool.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

EpochBatches compose_epoch_batches(const StreamBuffer& sb, const EpisodicMemory& em,
                                   std::size_t batch_size, Rng& rng) {
  EpochBatches out;
  out.drawn_em = em.samples();
  std::vector<SampleRef> pool;
  pool.reserve(sb.size() + out.drawn_em.size());
  pool.insert(pool.end(), sb.contents().begin(), sb.contents().end());
  pool.insert(pool.end(), out.drawn_em.begin(), out.drawn_em.end());
  out.batches = make_batches(std::move(pool), batch_size, rng);
  return out;
}

}  // namespace hemrt
