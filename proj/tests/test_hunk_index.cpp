#include <algorithm>
#include <fstream>
#include <random>
#include <thread>

#include "test_support.hpp"
#include "ttm/hunk_index.hpp"

namespace ttm {

void PrintTo(BackendKind kind, std::ostream* os) { *os << to_string(kind); }

namespace {

using testing::error_code_of;
using testing::TempDir;
namespace fs = std::filesystem;

HunkRecord rec(std::string sha, std::string path, int s, int e, Timestamp ts = 0, std::string author = "a@x") {
  return HunkRecord{HunkKey{std::move(sha), std::move(path), s, e}, ts, std::move(author), std::nullopt};
}

class IndexTest : public ::testing::TestWithParam<BackendKind> {
 protected:
  std::unique_ptr<HunkIndex> open(bool truncate = true) {
    BackendOptions o;
    o.kind = GetParam();
    o.store_path = tmp_.path() / "store";
    o.repo_id = "test";
    o.truncate = truncate;
    return open_backend(o);
  }
  TempDir tmp_;
};

TEST_P(IndexTest, RegisterThenLookupContained) {
  auto idx = open();
  idx->register_hunk(rec("C1", "a.txt", 1, 3));
  const auto hit = idx->lookup("C1", "a.txt", 2);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->key, (HunkKey{"C1", "a.txt", 1, 3}));
  EXPECT_FALSE(hit->modified());
}

TEST_P(IndexTest, OverlapIsRejected) {
  auto idx = open();
  idx->register_hunk(rec("C1", "a.txt", 1, 3));
  EXPECT_EQ(error_code_of([&] { idx->register_hunk(rec("C1", "a.txt", 3, 5)); }), Errc::DuplicateOrOverlappingKey);
  EXPECT_EQ(error_code_of([&] { idx->register_hunk(rec("C1", "a.txt", 1, 3)); }), Errc::DuplicateOrOverlappingKey);
  EXPECT_EQ(error_code_of([&] { idx->register_hunk(rec("C1", "a.txt", 0, 1)); }), Errc::DomainError);
  EXPECT_EQ(idx->size(), 1u);
}

TEST_P(IndexTest, DistinctPathsCoexist) {
  auto idx = open();
  idx->register_hunk(rec("C1", "a.txt", 1, 3));
  idx->register_hunk(rec("C1", "b.txt", 1, 3));
  EXPECT_TRUE(idx->lookup("C1", "a.txt", 1));
  EXPECT_TRUE(idx->lookup("C1", "b.txt", 3));
  EXPECT_EQ(idx->size(), 2u);
}

TEST_P(IndexTest, LookupMisses) {
  auto idx = open();
  EXPECT_FALSE(idx->lookup("C9", "a.txt", 1));
  idx->register_hunk(rec("C1", "a.txt", 1, 3));
  EXPECT_FALSE(idx->lookup("C1", "a.txt", 4));
  EXPECT_FALSE(idx->lookup("C1", "b.txt", 1));
}

TEST_P(IndexTest, InclusiveBounds) {
  auto idx = open();
  idx->register_hunk(rec("C1", "a", 5, 9));
  EXPECT_TRUE(idx->lookup("C1", "a", 5));
  EXPECT_TRUE(idx->lookup("C1", "a", 9));
  EXPECT_FALSE(idx->lookup("C1", "a", 10));
  EXPECT_FALSE(idx->lookup("C1", "a", 4));
}

TEST_P(IndexTest, FirstMarkWins) {
  auto idx = open();
  const HunkKey key{"C1", "a", 1, 3};
  idx->register_hunk(rec("C1", "a", 1, 3, 0));
  EXPECT_EQ(idx->mark_modified(key, "C2", 600), MarkResult::Recorded);
  EXPECT_EQ(idx->lookup("C1", "a", 1)->first_mod, (Modification{"C2", 600}));
  EXPECT_EQ(idx->mark_modified(key, "C3", 900), MarkResult::AlreadyModified);
  EXPECT_EQ(idx->lookup("C1", "a", 3)->first_mod, (Modification{"C2", 600}));
}

TEST_P(IndexTest, MarkErrors) {
  auto idx = open();
  EXPECT_EQ(error_code_of([&] { idx->mark_modified({"C1", "a", 1, 3}, "C2", 1); }), Errc::UnknownKey);
  idx->register_hunk(rec("C1", "a", 1, 3));
  EXPECT_EQ(error_code_of([&] { idx->mark_modified({"C1", "a", 1, 2}, "C2", 1); }), Errc::UnknownKey);
  EXPECT_EQ(error_code_of([&] { idx->mark_modified({"C1", "a", 1, 3}, "C1", 1); }), Errc::DomainError);
}

TEST_P(IndexTest, IterateEmptyAndSorted) {
  auto idx = open();
  EXPECT_TRUE(idx->iterate_all().empty());
  idx->register_hunk(rec("C2", "b", 1, 1, 20));
  idx->register_hunk(rec("C1", "z", 4, 4, 10));
  idx->register_hunk(rec("C1", "z", 1, 2, 10));
  const auto all = idx->iterate_all();
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].key, (HunkKey{"C1", "z", 1, 2}));
  EXPECT_EQ(all[1].key, (HunkKey{"C1", "z", 4, 4}));
  EXPECT_EQ(all[2].key, (HunkKey{"C2", "b", 1, 1}));
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end(), iteration_less));
}

std::vector<HunkRecord> random_records(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::vector<HunkRecord> out;
  int line = 1;
  for (int i = 0; i < n; ++i) {
    const auto sha = "S" + std::to_string(rng() % 7);
    const auto path = "p" + std::to_string(rng() % 3) + "/f\tx,\"q\"\n.txt";
    const int len = 1 + static_cast<int>(rng() % 4);
    out.push_back(rec(sha, path, line, line + len - 1, static_cast<Timestamp>(rng() % 5), "dev" + std::to_string(i % 3)));
    line += len;
  }
  return out;
}

TEST_P(IndexTest, OrderIndependentOfRegistration) {
  auto recs = random_records(42, 60);
  auto a = open();
  for (const auto& r : recs) a->register_hunk(r);
  const auto first = a->iterate_all();
  a.reset();
  std::shuffle(recs.begin(), recs.end(), std::mt19937_64(9));
  auto b = open(true);
  for (const auto& r : recs) b->register_hunk(r);
  EXPECT_EQ(b->iterate_all(), first);
}

TEST_P(IndexTest, ConcurrentLookupsSeeConsistentRecords) {
  auto idx = open();
  const auto recs = random_records(7, 200);
  for (const auto& r : recs) idx->register_hunk(r);
  std::atomic<bool> stop{false};
  std::atomic<int> bad{0};
  std::vector<std::thread> readers;
  for (int t = 0; t < 4; ++t) {
    readers.emplace_back([&, t] {
      std::size_t i = static_cast<std::size_t>(t);
      while (!stop.load()) {
        const auto& r = recs[i % recs.size()];
        const auto hit = idx->lookup(r.key.intro_sha, r.key.path, r.key.new_start);
        if (!hit || hit->key != r.key) ++bad;
        else if (hit->first_mod && hit->first_mod->sha != "M" + std::to_string(r.key.new_start)) ++bad;
        i += 7;
      }
    });
  }
  for (const auto& r : recs) idx->mark_modified(r.key, "M" + std::to_string(r.key.new_start), 99);
  stop = true;
  for (auto& t : readers) t.join();
  EXPECT_EQ(bad.load(), 0);
}

INSTANTIATE_TEST_SUITE_P(Backends, IndexTest, ::testing::Values(BackendKind::Memory, BackendKind::Disk),
                         [](const auto& info) { return std::string(to_string(info.param)); });

// Same operation sequence on both backends yields identical state.
TEST(BackendEquivalence, RandomOperationSequences) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    TempDir tmp;
    auto mem = open_backend({BackendKind::Memory});
    BackendOptions d{BackendKind::Disk, tmp / "s", "r", 3, true};
    auto disk = open_backend(d);
    const auto recs = random_records(seed, 80);
    std::mt19937_64 rng(seed);
    for (const auto& r : recs) {
      mem->register_hunk(r);
      disk->register_hunk(r);
      if (rng() % 2 == 0) {
        const auto& victim = recs[rng() % recs.size()];
        if (mem->lookup(victim.key.intro_sha, victim.key.path, victim.key.new_start)) {
          const auto ts = static_cast<Timestamp>(rng() % 100);
          EXPECT_EQ(mem->mark_modified(victim.key, "X" + std::to_string(ts), ts),
                    disk->mark_modified(victim.key, "X" + std::to_string(ts), ts));
        }
      }
    }
    EXPECT_EQ(mem->iterate_all(), disk->iterate_all());
  }
}

TEST(DiskIndex, RoundTripAcrossReopen) {
  TempDir tmp;
  std::vector<HunkRecord> before;
  {
    DiskHunkIndex idx(tmp / "s", "repo-x", 16, true);
    idx.register_hunk(rec("C1", "a.txt", 1, 3, 5));
    idx.register_hunk(rec("C2", "b.txt", 2, 2, 7));
    idx.mark_modified({"C1", "a.txt", 1, 3}, "C2", 7);
    before = idx.iterate_all();
  }
  DiskHunkIndex again(tmp / "s", "repo-x", 16, false);
  EXPECT_EQ(again.iterate_all(), before);
  EXPECT_EQ(again.size(), 2u);
  EXPECT_EQ(again.repo_id(), "repo-x");
  EXPECT_EQ(again.lookup("C1", "a.txt", 2)->first_mod, (Modification{"C2", 7}));
}

TEST(DiskIndex, TruncateDiscardsExistingStore) {
  TempDir tmp;
  { DiskHunkIndex(tmp / "s", "r", 16, true).register_hunk(rec("C1", "a", 1, 1)); }
  DiskHunkIndex fresh(tmp / "s", "r", 16, true);
  EXPECT_EQ(fresh.size(), 0u);
}

void write_store_with_two_records(const fs::path& dir) {
  DiskHunkIndex idx(dir, "r", 16, true);
  idx.register_hunk(rec("C1", "a.txt", 1, 3));
  idx.register_hunk(rec("C2", "a.txt", 1, 3));
}

TEST(DiskIndex, TruncatedLogIsCorrupt) {
  TempDir tmp;
  write_store_with_two_records(tmp / "s");
  const auto log = tmp / "s" / std::string(store_format::kLogName);
  fs::resize_file(log, fs::file_size(log) - 5);
  EXPECT_EQ(error_code_of([&] { DiskHunkIndex(tmp / "s", "r", 16, false); }), Errc::StoreCorrupt);
}

TEST(DiskIndex, DroppedTailRecordIsCorrupt) {
  TempDir tmp;
  write_store_with_two_records(tmp / "s");
  const auto log = tmp / "s" / std::string(store_format::kLogName);
  std::ifstream in(log);
  std::string first;
  std::getline(in, first);
  in.close();
  std::ofstream(log, std::ios::trunc) << first << '\n';
  EXPECT_EQ(error_code_of([&] { DiskHunkIndex(tmp / "s", "r", 16, false); }), Errc::StoreCorrupt);
}

TEST(DiskIndex, FlippedByteIsCorrupt) {
  TempDir tmp;
  write_store_with_two_records(tmp / "s");
  const auto log = tmp / "s" / std::string(store_format::kLogName);
  std::fstream f(log, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(3);
  f.put('Z');
  f.close();
  EXPECT_EQ(error_code_of([&] { DiskHunkIndex(tmp / "s", "r", 16, false); }), Errc::StoreCorrupt);
}

TEST(DiskIndex, TamperedMetaIsCorrupt) {
  TempDir tmp;
  write_store_with_two_records(tmp / "s");
  const auto meta = tmp / "s" / std::string(store_format::kMetaName);
  std::ofstream(meta, std::ios::app) << "junk\n";
  EXPECT_EQ(error_code_of([&] { DiskHunkIndex(tmp / "s", "r", 16, false); }), Errc::StoreCorrupt);
}

TEST(DiskIndex, UnwritableStore) {
  TempDir tmp;
  std::ofstream(tmp / "file") << "x";
  EXPECT_EQ(error_code_of([&] { DiskHunkIndex(tmp / "file" / "s", "r", 16, true); }), Errc::StoreUnwritable);
  EXPECT_EQ(error_code_of([&] { (void)open_backend({BackendKind::Disk}); }), Errc::StoreUnwritable);
}

TEST(DiskIndex, CacheIsBounded) {
  TempDir tmp;
  DiskHunkIndex idx(tmp / "s", "r", 4, true);
  for (int i = 0; i < 20; ++i) idx.register_hunk(rec("C" + std::to_string(i), "a", 1, 2));
  for (int round = 0; round < 2; ++round) {
    for (int i = 0; i < 20; ++i) EXPECT_TRUE(idx.lookup("C" + std::to_string(i), "a", 2));
  }
  const auto stats = idx.cache_stats();
  EXPECT_LE(stats.resident_buckets, 4u);
  EXPECT_GT(stats.misses, 0u);
  (void)idx.lookup("C19", "a", 1);
  EXPECT_GT(idx.cache_stats().hits, stats.hits);
}

TEST(StoreFormat, EscapingRoundTrips) {
  for (const std::string s : {"", "plain", "tab\there", "nl\nx", "back\\slash", "\\t literal"}) {
    const auto e = store_format::escape_field(s);
    EXPECT_EQ(e.find('\t'), std::string::npos);
    EXPECT_EQ(e.find('\n'), std::string::npos);
    EXPECT_EQ(store_format::unescape_field(e), s);
  }
  EXPECT_EQ(store_format::crc32("123456789"), 0xCBF43926u);
}

TEST(BackendKindNames, ParseAndPrint) {
  EXPECT_EQ(parse_backend_kind("mem"), BackendKind::Memory);
  EXPECT_EQ(parse_backend_kind("disk"), BackendKind::Disk);
  EXPECT_FALSE(parse_backend_kind("sqlite"));
  EXPECT_EQ(to_string(BackendKind::Disk), "disk");
}

}  // namespace
}  // namespace ttm
