#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "hemrt/memory_hierarchy.hpp"

using namespace hemrt;
using hemrt::testing::class_range;
using hemrt::testing::make_task;

namespace {

std::map<ClassId, std::size_t> counts(const EpisodicMemory& em) {
  std::map<ClassId, std::size_t> m;
  for (const auto& [c, v] : em.slots()) m[c] = v.size();
  return m;
}

std::multiset<SampleId> ids_of(const std::vector<SampleRef>& v) {
  std::multiset<SampleId> s;
  for (const auto& x : v) s.insert(x->id);
  return s;
}

}  // namespace

TEST(BalancedQuotas, RemainderGoesToLowestIds) {
  const std::vector<ClassId> cls{7, 3, 5};
  const auto q = balanced_quotas(10, cls);
  EXPECT_EQ(q.at(3), 4);
  EXPECT_EQ(q.at(5), 3);
  EXPECT_EQ(q.at(7), 3);
  EXPECT_TRUE(balanced_quotas(10, std::vector<ClassId>{}).empty());
  EXPECT_THROW(balanced_quotas(-1, cls), std::invalid_argument);
}

TEST(BufferStream, ExactFitOverflowAndUnderFill) {
  {
    StorageArchive archive;
    StreamBuffer sb(5000);
    buffer_stream(make_task(1, class_range(0, 10), 500), sb, archive);
    EXPECT_EQ(sb.size(), 5000u);
    EXPECT_TRUE(sb.overflow().empty());
  }
  {
    StorageArchive archive;
    StreamBuffer sb(1000);
    const auto task = make_task(1, class_range(0, 10), 500);
    buffer_stream(task, sb, archive);
    EXPECT_EQ(sb.size(), 1000u);
    EXPECT_EQ(sb.overflow().size(), 4000u);
    EXPECT_EQ(sb.contents().front()->id, task.samples.front()->id);
    // Overflow reaches storage at flush and stays available for replay.
    EpisodicMemory em(0);
    Rng rng(1);
    flush(task, sb, em, archive, rng);
    EXPECT_EQ(archive.size(), 5000u);
  }
  {
    StorageArchive archive;
    StreamBuffer sb(1000);
    buffer_stream(make_task(1, {0}, 100), sb, archive);
    EXPECT_EQ(sb.size(), 100u);
  }
}

TEST(BufferStream, RequiresEmptyBuffer) {
  StorageArchive archive;
  StreamBuffer sb(10);
  buffer_stream(make_task(1, {0}, 5), sb, archive);
  EXPECT_THROW(buffer_stream(make_task(2, {1}, 5, 100), sb, archive), std::logic_error);
}

TEST(Flush, TenToTwentyClassesGivesFivePerClass) {
  StorageArchive archive;
  EpisodicMemory em(100);
  StreamBuffer sb(1000);
  Rng rng(3);
  const auto t1 = make_task(1, class_range(0, 10), 20, 0);
  buffer_stream(t1, sb, archive);
  const auto r1 = flush(t1, sb, em, archive, rng);
  EXPECT_EQ(r1.classes_seen, 10u);
  for (const auto& [c, n] : counts(em)) EXPECT_EQ(n, 10u) << c;

  const auto t2 = make_task(2, class_range(10, 10), 20, 1000);
  buffer_stream(t2, sb, archive);
  flush(t2, sb, em, archive, rng);
  const auto m = counts(em);
  EXPECT_EQ(m.size(), 20u);
  for (const auto& [c, n] : m) EXPECT_EQ(n, 5u) << c;
  EXPECT_TRUE(sb.empty());
}

TEST(Flush, ThirtyClassesSpreadByBruteCount) {
  StorageArchive archive;
  EpisodicMemory em(100);
  StreamBuffer sb(10000);
  Rng rng(5);
  const auto t = make_task(1, class_range(0, 30), 10);
  buffer_stream(t, sb, archive);
  flush(t, sb, em, archive, rng);
  std::size_t fours = 0, threes = 0;
  for (const auto& [c, n] : counts(em)) {
    if (n == 4) {
      ++fours;
      EXPECT_LT(c, 10);  // remainder to the lowest ids
    } else if (n == 3) {
      ++threes;
    } else {
      ADD_FAILURE() << "class " << c << " holds " << n;
    }
  }
  EXPECT_EQ(fours, 10u);
  EXPECT_EQ(threes, 20u);
  EXPECT_EQ(em.size(), 100u);
  EXPECT_LE(em.class_spread(), 1);
}

TEST(Flush, ZeroCapacityEmStaysEmpty) {
  StorageArchive archive;
  EpisodicMemory em(0);
  StreamBuffer sb(100);
  Rng rng(1);
  const auto t = make_task(1, {0, 1}, 10);
  buffer_stream(t, sb, archive);
  flush(t, sb, em, archive, rng);
  EXPECT_EQ(em.size(), 0u);
  EXPECT_EQ(archive.size(), 20u);
}

TEST(Flush, ArchiveIsAppendOnlyWithoutCap) {
  StorageArchive archive;
  EpisodicMemory em(10);
  StreamBuffer sb(100);
  Rng rng(1);
  std::set<SampleId> before;
  for (int t = 0; t < 5; ++t) {
    const auto task = make_task(t + 1, class_range(t * 3, 3), 7, t * 100);
    buffer_stream(task, sb, archive);
    flush(task, sb, em, archive, rng);
    for (SampleId id : before) EXPECT_TRUE(archive.contains(id));
    for (const auto& s : task.samples) before.insert(s->id);
    EXPECT_EQ(archive.size(), before.size());
  }
}

TEST(StorageArchive, CapKeepsClassBalance) {
  StorageArchive archive(std::int64_t{40});
  archive.append(make_task(1, class_range(0, 4), 30).samples);
  Rng rng(2);
  EXPECT_EQ(archive.enforce_capacity(rng), 80u);
  EXPECT_EQ(archive.size(), 40u);
  for (ClassId c : archive.classes()) EXPECT_EQ(archive.class_size(c), 10u);
}

TEST(ComposeBatches, SizesAndMembership) {
  StorageArchive archive;
  EpisodicMemory em(10);
  StreamBuffer sb(100);
  Rng rng(1);
  const auto old = make_task(1, {0, 1}, 20, 0);
  buffer_stream(old, sb, archive);
  flush(old, sb, em, archive, rng);
  ASSERT_EQ(em.size(), 10u);

  StreamBuffer sb10(10);
  buffer_stream(make_task(2, {2}, 10, 500), sb10, archive);
  Rng brng(7);
  const auto eb = compose_epoch_batches(sb10, em, 4, brng);
  ASSERT_EQ(eb.batches.size(), 5u);
  for (const auto& b : eb.batches) EXPECT_EQ(b.size(), 4u);
  std::vector<SampleRef> all;
  for (const auto& b : eb.batches) all.insert(all.end(), b.begin(), b.end());
  auto expected = sb10.contents();
  const auto em_all = em.samples();
  expected.insert(expected.end(), em_all.begin(), em_all.end());
  EXPECT_EQ(ids_of(all), ids_of(expected));
  EXPECT_EQ(ids_of(eb.drawn_em), ids_of(em_all));

  StreamBuffer empty_sb(0);
  EpisodicMemory em8(8);
  Rng r8(1);
  resize(em8, 8, archive, r8);
  Rng b8(2);
  const auto only_em = compose_epoch_batches(empty_sb, em8, 3, b8);
  ASSERT_EQ(only_em.batches.size(), 3u);
  EXPECT_EQ(only_em.batches[0].size(), 3u);
  EXPECT_EQ(only_em.batches[1].size(), 3u);
  EXPECT_EQ(only_em.batches[2].size(), 2u);
  for (const auto& b : only_em.batches)
    for (const auto& s : b) EXPECT_TRUE(em8.contains(s->id));
}

TEST(ComposeBatches, DeterministicUnderSeedAndRejectsEmpty) {
  StorageArchive archive;
  StreamBuffer sb(50);
  buffer_stream(make_task(1, {0, 1, 2}, 10), sb, archive);
  EpisodicMemory em(0);
  Rng a(11), b(11);
  const auto x = compose_epoch_batches(sb, em, 7, a);
  const auto y = compose_epoch_batches(sb, em, 7, b);
  ASSERT_EQ(x.batches.size(), y.batches.size());
  for (std::size_t i = 0; i < x.batches.size(); ++i)
    for (std::size_t j = 0; j < x.batches[i].size(); ++j)
      EXPECT_EQ(x.batches[i][j]->id, y.batches[i][j]->id);

  StreamBuffer none(0);
  Rng r(1);
  EXPECT_THROW(compose_epoch_batches(none, em, 4, r), std::invalid_argument);
  EXPECT_THROW(compose_epoch_batches(sb, em, 0, r), std::invalid_argument);
}

TEST(Resize, ShrinkAndGrow) {
  StorageArchive archive;
  archive.append(make_task(1, class_range(0, 10), 200).samples);
  EpisodicMemory em(0);
  Rng rng(4);
  resize(em, 1000, archive, rng);
  for (const auto& [c, n] : counts(em)) EXPECT_EQ(n, 100u);
  resize(em, 500, archive, rng);
  for (const auto& [c, n] : counts(em)) EXPECT_EQ(n, 50u);
  resize(em, 1000, archive, rng);
  for (const auto& [c, n] : counts(em)) EXPECT_EQ(n, 100u);
  EXPECT_EQ(em.size(), 1000u);
}

TEST(Resize, ScarceClassIsCappedAtAvailability) {
  StorageArchive archive;
  for (ClassId c = 0; c < 10; ++c)
    archive.append(hemrt::testing::make_samples({c}, c == 7 ? 30 : 200, c * 1000));
  EpisodicMemory em(0);
  Rng rng(9);
  resize(em, 500, archive, rng);
  resize(em, 1000, archive, rng);
  const auto m = counts(em);
  EXPECT_EQ(m.at(7), 30u);
  for (const auto& [c, n] : m)
    if (c != 7) EXPECT_EQ(n, 100u) << c;  // quota unchanged, no redistribution
}

TEST(StreamBufferResize, ShrinkThenGrowRestoresOrder) {
  StorageArchive archive;
  StreamBuffer sb(10);
  const auto task = make_task(1, {0}, 15);
  buffer_stream(task, sb, archive);
  resize(sb, 4);
  ASSERT_EQ(sb.size(), 4u);
  EXPECT_EQ(sb.overflow().size(), 11u);
  resize(sb, 12);
  ASSERT_EQ(sb.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(sb.contents()[i]->id, task.samples[i]->id);
}

TEST(MaskedView, DoesNotMutateAndPrefersResidents) {
  StorageArchive archive;
  archive.append(make_task(1, class_range(0, 4), 50).samples);
  EpisodicMemory em(0);
  Rng rng(1);
  resize(em, 40, archive, rng);
  const auto before = em.samples();

  Rng vr(2);
  const auto small = masked_em_view(em, archive, 20, vr);
  EXPECT_EQ(small.size(), 20u);
  for (const auto& s : small) EXPECT_TRUE(em.contains(s->id));

  const auto big = masked_em_view(em, archive, 120, vr);
  EXPECT_EQ(big.size(), 120u);
  std::size_t resident = 0;
  for (const auto& s : big) resident += em.contains(s->id) ? 1 : 0;
  EXPECT_EQ(resident, 40u);
  const auto big_ids = ids_of(big);
  EXPECT_EQ(std::set<SampleId>(big_ids.begin(), big_ids.end()).size(), 120u);

  EXPECT_EQ(ids_of(em.samples()), ids_of(before));
  EXPECT_EQ(masked_em_view(em, archive, 10000, vr).size(), 200u);
}

TEST(EpisodicMemory, ReplaceKeepsClassAndRejectsForeignClass) {
  StorageArchive archive;
  archive.append(make_task(1, {0, 1}, 10).samples);
  EpisodicMemory em(0);
  Rng rng(1);
  resize(em, 4, archive, rng);
  const auto victim = em.slots().at(0).front();
  SampleRef replacement;
  for (const auto& s : archive.class_samples(0))
    if (!em.contains(s->id)) replacement = s;
  ASSERT_TRUE(replacement);
  EXPECT_TRUE(em.replace(victim->id, replacement));
  EXPECT_TRUE(em.contains(replacement->id));
  EXPECT_FALSE(em.contains(victim->id));
  EXPECT_FALSE(em.replace(victim->id, replacement));  // stale slot

  const auto other = em.slots().at(1).front();
  SampleRef wrong;
  for (const auto& s : archive.class_samples(0))
    if (!em.contains(s->id)) wrong = s;
  EXPECT_THROW(em.replace(other->id, wrong), std::logic_error);
}

TEST(ClassBalance, RandomFlushResizeSequencesKeepSpread) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    StorageArchive archive;
    EpisodicMemory em(0);
    std::uniform_int_distribution<int> cap(0, 60), op(0, 2), per(1, 15), ncls(1, 4);
    ClassId next_class = 0;
    SampleId next_id = 0;
    for (int i = 0; i < 40; ++i) {
      if (op(rng) == 0) {
        const int n = ncls(rng);
        const int p = per(rng);
        const auto task = make_task(i + 1, class_range(next_class, n), p, next_id);
        next_class += n;
        next_id += n * p;
        StreamBuffer sb(cap(rng));
        buffer_stream(task, sb, archive);
        flush(task, sb, em, archive, rng);
      } else {
        resize(em, cap(rng), archive, rng);
      }
      const auto q = balanced_quotas(em.capacity(), archive.classes());
      std::int64_t lo = INT64_MAX, hi = 0;
      for (ClassId c : archive.classes()) {
        const auto n = static_cast<std::int64_t>(em.class_count(c));
        EXPECT_EQ(n, std::min<std::int64_t>(q.at(c), archive.class_size(c)));
        if (static_cast<std::int64_t>(archive.class_size(c)) >= q.at(c)) {
          lo = std::min(lo, n);
          hi = std::max(hi, n);
        }
      }
      if (hi > 0) EXPECT_LE(hi - lo, 1);
      EXPECT_LE(static_cast<std::int64_t>(em.size()), em.capacity());
    }
  }
}
