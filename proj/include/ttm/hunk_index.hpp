#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ttm/repo_source.hpp"

namespace ttm {

struct HunkKey {
  std::string intro_sha;
  std::string path;
  int new_start = 0;
  int new_end = 0;  // inclusive

  friend bool operator==(const HunkKey&, const HunkKey&) = default;
};

struct Modification {
  std::string sha;
  Timestamp ts = 0;

  friend bool operator==(const Modification&, const Modification&) = default;
};

struct HunkRecord {
  HunkKey key;
  Timestamp intro_ts = 0;
  std::string author_id;
  std::optional<Modification> first_mod;  // absent while unmodified

  [[nodiscard]] bool modified() const { return first_mod.has_value(); }
  friend bool operator==(const HunkRecord&, const HunkRecord&) = default;
};

// Ordering used by iterate_all(): intro_ts, sha, path, new_start.
bool iteration_less(const HunkRecord& a, const HunkRecord& b);

enum class MarkResult { Recorded, AlreadyModified };

enum class BackendKind { Memory, Disk };

std::string_view to_string(BackendKind kind);
std::optional<BackendKind> parse_backend_kind(std::string_view name);

/// Keyed store of introduced hunks answering "which hunk owns this line?".
///
/// Lookups may run concurrently with each other and with a single writer;
/// a reader never observes a partially applied mark_modified().
class HunkIndex {
 public:
  virtual ~HunkIndex() = default;

  virtual void register_hunk(const HunkRecord& record) = 0;
  [[nodiscard]] virtual std::optional<HunkRecord> lookup(std::string_view origin_sha,
                                                         std::string_view path, int line) const = 0;
  virtual MarkResult mark_modified(const HunkKey& key, const std::string& mod_sha, Timestamp mod_ts) = 0;
  [[nodiscard]] virtual std::vector<HunkRecord> iterate_all() const = 0;
  [[nodiscard]] virtual std::size_t size() const = 0;
  [[nodiscard]] virtual BackendKind kind() const = 0;

  // Makes every accepted write durable; the disk backend also does this on destruction.
  virtual void flush() {}
};

struct BackendOptions {
  BackendKind kind = BackendKind::Memory;
  std::optional<std::filesystem::path> store_path;
  std::string repo_id;                    // recorded in the store's meta file
  std::size_t cache_buckets = 4096;       // disk backend read cache, in (sha, path) buckets
  bool truncate = false;                  // disk: discard an existing store instead of replaying it
};

std::unique_ptr<HunkIndex> open_backend(const BackendOptions& opts);

/// Everything in process memory: one ordered map of hunks per (sha, path) bucket.
class MemoryHunkIndex final : public HunkIndex {
 public:
  MemoryHunkIndex();
  ~MemoryHunkIndex() override;

  void register_hunk(const HunkRecord& record) override;
  [[nodiscard]] std::optional<HunkRecord> lookup(std::string_view origin_sha, std::string_view path,
                                                 int line) const override;
  MarkResult mark_modified(const HunkKey& key, const std::string& mod_sha, Timestamp mod_ts) override;
  [[nodiscard]] std::vector<HunkRecord> iterate_all() const override;
  [[nodiscard]] std::size_t size() const override;
  [[nodiscard]] BackendKind kind() const override { return BackendKind::Memory; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct CacheStats {
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t resident_buckets = 0;
};

/// Append-only record log on disk. Only line offsets are kept in memory;
/// records are read back on demand through an LRU cache of buckets.
class DiskHunkIndex final : public HunkIndex {
 public:
  DiskHunkIndex(const std::filesystem::path& store_dir, const std::string& repo_id,
                std::size_t cache_buckets, bool truncate);
  ~DiskHunkIndex() override;

  void register_hunk(const HunkRecord& record) override;
  [[nodiscard]] std::optional<HunkRecord> lookup(std::string_view origin_sha, std::string_view path,
                                                 int line) const override;
  MarkResult mark_modified(const HunkKey& key, const std::string& mod_sha, Timestamp mod_ts) override;
  [[nodiscard]] std::vector<HunkRecord> iterate_all() const override;
  [[nodiscard]] std::size_t size() const override;
  [[nodiscard]] BackendKind kind() const override { return BackendKind::Disk; }
  void flush() override;

  [[nodiscard]] CacheStats cache_stats() const;
  [[nodiscard]] const std::string& repo_id() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Store format helpers, exposed for tests and tooling.
namespace store_format {

inline constexpr int kVersion = 1;
inline constexpr std::string_view kLogName = "hunks.log";
inline constexpr std::string_view kMetaName = "meta";

std::uint32_t crc32(std::string_view bytes);
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);

}  // namespace store_format

}  // namespace ttm
