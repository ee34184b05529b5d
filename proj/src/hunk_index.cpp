#include "ttm/hunk_index.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <list>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <system_error>
#include <tuple>
#include <unordered_map>
#include <utility>

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include "ttm/error.hpp"

namespace ttm {
namespace fs = std::filesystem;

bool iteration_less(const HunkRecord& a, const HunkRecord& b) {
  return std::tie(a.intro_ts, a.key.intro_sha, a.key.path, a.key.new_start) <
         std::tie(b.intro_ts, b.key.intro_sha, b.key.path, b.key.new_start);
}

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::Memory ? "mem" : "disk";
}

std::optional<BackendKind> parse_backend_kind(std::string_view name) {
  if (name == "mem" || name == "memory") return BackendKind::Memory;
  if (name == "disk") return BackendKind::Disk;
  return std::nullopt;
}

namespace {

std::string bucket_id(std::string_view sha, std::string_view path) {
  std::string id;
  id.reserve(sha.size() + path.size() + 1);
  id.append(sha);
  id.push_back('\0');
  id.append(path);
  return id;
}

std::string describe(const HunkKey& k) {
  return k.intro_sha.substr(0, 12) + ":" + k.path + ":" + std::to_string(k.new_start) + ".." +
         std::to_string(k.new_end);
}

void validate_new_record(const HunkRecord& r) {
  if (r.key.new_start < 1 || r.key.new_end < r.key.new_start) {
    throw Error(Errc::DomainError, "invalid hunk range " + describe(r.key));
  }
  if (r.first_mod) throw Error(Errc::DomainError, "hunk registered in modified state " + describe(r.key));
}

// Throws unless [start, end] is disjoint from every range already in `bucket`.
template <typename Map, typename EndOf>
void check_disjoint(const Map& bucket, const HunkKey& key, EndOf end_of) {
  auto next = bucket.lower_bound(key.new_start);
  if (next != bucket.end() && next->first <= key.new_end) {
    throw Error(Errc::DuplicateOrOverlappingKey, describe(key));
  }
  if (next != bucket.begin()) {
    auto prev = std::prev(next);
    if (end_of(prev->second) >= key.new_start) throw Error(Errc::DuplicateOrOverlappingKey, describe(key));
  }
}

// Entry whose range contains `line`, or end().
template <typename Map, typename EndOf>
auto find_containing(const Map& bucket, int line, EndOf end_of) {
  auto it = bucket.upper_bound(line);
  if (it == bucket.begin()) return bucket.end();
  --it;
  return end_of(it->second) >= line ? it : bucket.end();
}

}  // namespace

// ---------------------------------------------------------------------------
// memory backend

struct MemoryHunkIndex::Impl {
  mutable std::shared_mutex mu;
  std::unordered_map<std::string, std::map<int, HunkRecord>> buckets;
  std::size_t count = 0;
};

MemoryHunkIndex::MemoryHunkIndex() : impl_(std::make_unique<Impl>()) {}
MemoryHunkIndex::~MemoryHunkIndex() = default;

void MemoryHunkIndex::register_hunk(const HunkRecord& record) {
  validate_new_record(record);
  std::unique_lock lock(impl_->mu);
  auto& bucket = impl_->buckets[bucket_id(record.key.intro_sha, record.key.path)];
  check_disjoint(bucket, record.key, [](const HunkRecord& r) { return r.key.new_end; });
  bucket.emplace(record.key.new_start, record);
  ++impl_->count;
}

std::optional<HunkRecord> MemoryHunkIndex::lookup(std::string_view origin_sha, std::string_view path,
                                                  int line) const {
  std::shared_lock lock(impl_->mu);
  const auto b = impl_->buckets.find(bucket_id(origin_sha, path));
  if (b == impl_->buckets.end()) return std::nullopt;
  const auto it = find_containing(b->second, line, [](const HunkRecord& r) { return r.key.new_end; });
  if (it == b->second.end()) return std::nullopt;
  return it->second;
}

MarkResult MemoryHunkIndex::mark_modified(const HunkKey& key, const std::string& mod_sha, Timestamp mod_ts) {
  std::unique_lock lock(impl_->mu);
  const auto b = impl_->buckets.find(bucket_id(key.intro_sha, key.path));
  if (b == impl_->buckets.end()) throw Error(Errc::UnknownKey, describe(key));
  const auto it = b->second.find(key.new_start);
  if (it == b->second.end() || it->second.key.new_end != key.new_end) throw Error(Errc::UnknownKey, describe(key));
  if (it->second.first_mod) return MarkResult::AlreadyModified;
  if (mod_sha == key.intro_sha) throw Error(Errc::DomainError, "hunk modified by its own commit " + describe(key));
  it->second.first_mod = Modification{mod_sha, mod_ts};
  return MarkResult::Recorded;
}

std::vector<HunkRecord> MemoryHunkIndex::iterate_all() const {
  std::shared_lock lock(impl_->mu);
  std::vector<HunkRecord> out;
  out.reserve(impl_->count);
  for (const auto& [id, bucket] : impl_->buckets) {
    for (const auto& [start, rec] : bucket) out.push_back(rec);
  }
  std::sort(out.begin(), out.end(), iteration_less);
  return out;
}

std::size_t MemoryHunkIndex::size() const {
  std::shared_lock lock(impl_->mu);
  return impl_->count;
}

// ---------------------------------------------------------------------------
// store format

namespace store_format {

std::uint32_t crc32(std::string_view bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out.push_back(s[i]);
      continue;
    }
    if (++i >= s.size()) throw Error(Errc::StoreCorrupt, "dangling escape");
    switch (s[i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: throw Error(Errc::StoreCorrupt, "unknown escape");
    }
  }
  return out;
}

}  // namespace store_format

// ---------------------------------------------------------------------------
// disk backend
//
// hunks.log holds one record per line, fields separated by TAB:
//   R <intro_sha> <path> <new_start> <new_end> <intro_ts> <author> <crc32>
//   M <intro_sha> <path> <new_start> <new_end> <mod_sha> <mod_ts> <crc32>
// The crc32 (8 lowercase hex digits) covers the bytes before its TAB.
// meta is "key=value" lines: format_version, repo, records, then meta_crc
// over the preceding bytes. It is rewritten atomically on every flush.

namespace {

std::string hex8(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

std::string seal(std::string body) {
  const auto crc = store_format::crc32(body);
  body.push_back('\t');
  body += hex8(crc);
  body.push_back('\n');
  return body;
}

std::string register_line(const HunkRecord& r) {
  using store_format::escape_field;
  std::ostringstream os;
  os << "R\t" << escape_field(r.key.intro_sha) << '\t' << escape_field(r.key.path) << '\t' << r.key.new_start
     << '\t' << r.key.new_end << '\t' << r.intro_ts << '\t' << escape_field(r.author_id);
  return seal(os.str());
}

std::string mark_line(const HunkKey& k, const Modification& m) {
  using store_format::escape_field;
  std::ostringstream os;
  os << "M\t" << escape_field(k.intro_sha) << '\t' << escape_field(k.path) << '\t' << k.new_start << '\t'
     << k.new_end << '\t' << escape_field(m.sha) << '\t' << m.ts;
  return seal(os.str());
}

template <typename Int>
Int field_int(std::string_view s) {
  Int v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw Error(Errc::StoreCorrupt, "bad integer field");
  return v;
}

struct LogLine {
  char tag = 0;
  HunkKey key;
  Timestamp ts = 0;   // intro_ts for R, mod_ts for M
  std::string text;   // author for R, mod_sha for M
};

// `line` excludes the trailing newline.
LogLine parse_log_line(std::string_view line) {
  const auto tab = line.rfind('\t');
  if (tab == std::string_view::npos || line.size() - tab - 1 != 8) {
    throw Error(Errc::StoreCorrupt, "record without checksum");
  }
  const auto body = line.substr(0, tab);
  if (hex8(store_format::crc32(body)) != line.substr(tab + 1)) {
    throw Error(Errc::StoreCorrupt, "checksum mismatch");
  }
  std::vector<std::string_view> f;
  std::size_t pos = 0;
  while (true) {
    const auto next = body.find('\t', pos);
    f.push_back(body.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  if (f.size() != 7 || f[0].size() != 1 || (f[0][0] != 'R' && f[0][0] != 'M')) {
    throw Error(Errc::StoreCorrupt, "malformed record");
  }
  LogLine out;
  out.tag = f[0][0];
  out.key.intro_sha = store_format::unescape_field(f[1]);
  out.key.path = store_format::unescape_field(f[2]);
  out.key.new_start = field_int<int>(f[3]);
  out.key.new_end = field_int<int>(f[4]);
  if (out.tag == 'R') {
    out.ts = field_int<Timestamp>(f[5]);
    out.text = store_format::unescape_field(f[6]);
  } else {
    out.text = store_format::unescape_field(f[5]);
    out.ts = field_int<Timestamp>(f[6]);
  }
  return out;
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  [[nodiscard]] int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

std::string read_whole(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::StoreCorrupt, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

struct DiskHunkIndex::Impl {
  struct Entry {
    int new_end = 0;
    std::uint64_t reg_offset = 0;
    std::uint32_t reg_len = 0;
    std::optional<std::uint64_t> mod_offset;
    std::uint32_t mod_len = 0;
  };
  using Bucket = std::map<int, Entry>;
  using CachedBucket = std::map<int, HunkRecord>;

  fs::path dir;
  std::string repo_id;
  std::size_t capacity = 4096;

  mutable std::shared_mutex mu;  // guards index, log_size, records
  std::unordered_map<std::string, Bucket> index;
  std::uint64_t log_size = 0;
  std::size_t records = 0;  // lines in the log
  std::size_t hunks = 0;
  Fd write_fd;
  Fd read_fd;

  // LRU of fully materialized buckets; front is most recent.
  mutable std::mutex cache_mu;
  mutable std::list<std::pair<std::string, CachedBucket>> lru;
  mutable std::unordered_map<std::string, decltype(lru)::iterator> cache_pos;
  mutable CacheStats stats;

  fs::path log_path() const { return dir / store_format::kLogName; }
  fs::path meta_path() const { return dir / store_format::kMetaName; }

  void append(const std::string& line) {
    std::size_t done = 0;
    while (done < line.size()) {
      const ssize_t n = ::write(write_fd.get(), line.data() + done, line.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(Errc::StoreUnwritable, "write to " + log_path().string() + ": " + std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
    log_size += line.size();
    ++records;
  }

  std::string read_at(std::uint64_t offset, std::size_t len) const {
    std::string buf(len, '\0');
    std::size_t done = 0;
    while (done < len) {
      const ssize_t n = ::pread(read_fd.get(), buf.data() + done, len - done, static_cast<off_t>(offset + done));
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        throw Error(Errc::StoreCorrupt, "short read from " + log_path().string());
      }
      done += static_cast<std::size_t>(n);
    }
    return buf;
  }

  HunkRecord materialize(const Entry& e) const {
    const auto reg = parse_log_line(std::string_view(read_at(e.reg_offset, e.reg_len)).substr(0, e.reg_len - 1));
    HunkRecord r{reg.key, reg.ts, reg.text, std::nullopt};
    if (e.mod_offset) {
      const auto mod = parse_log_line(std::string_view(read_at(*e.mod_offset, e.mod_len)).substr(0, e.mod_len - 1));
      r.first_mod = Modification{mod.text, mod.ts};
    }
    return r;
  }

  // Caller holds `mu` (shared or unique). Copies out under the cache lock
  // since a concurrent reader may evict the bucket right after.
  HunkRecord cached_record(const std::string& id, const Bucket& bucket, int start) const {
    std::lock_guard lock(cache_mu);
    if (const auto it = cache_pos.find(id); it != cache_pos.end()) {
      ++stats.hits;
      lru.splice(lru.begin(), lru, it->second);
      return it->second->second.at(start);
    }
    ++stats.misses;
    CachedBucket loaded;
    for (const auto& [start, e] : bucket) loaded.emplace(start, materialize(e));
    lru.emplace_front(id, std::move(loaded));
    cache_pos[id] = lru.begin();
    while (lru.size() > capacity) {
      cache_pos.erase(lru.back().first);
      lru.pop_back();
    }
    return lru.front().second.at(start);
  }

  // Caller holds `mu` uniquely; keeps a resident bucket in step with the log.
  void update_cache(const std::string& id, const HunkRecord& r) {
    std::lock_guard lock(cache_mu);
    if (const auto it = cache_pos.find(id); it != cache_pos.end()) {
      it->second->second[r.key.new_start] = r;
    }
  }

  void write_meta() const {
    std::ostringstream os;
    os << "format_version=" << store_format::kVersion << '\n'
       << "repo=" << store_format::escape_field(repo_id) << '\n'
       << "records=" << records << '\n';
    std::string text = os.str();
    text += "meta_crc=" + hex8(store_format::crc32(text)) + "\n";
    const auto tmp = dir / (std::string(store_format::kMetaName) + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << text;
      if (!out.flush()) throw Error(Errc::StoreUnwritable, "cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, meta_path(), ec);
    if (ec) throw Error(Errc::StoreUnwritable, "cannot replace " + meta_path().string() + ": " + ec.message());
  }

  // Returns the record count stored in meta.
  std::size_t read_meta() {
    const auto text = read_whole(meta_path());
    const auto crc_pos = text.rfind("meta_crc=");
    if (crc_pos == std::string::npos || text.size() != crc_pos + 9 + 8 + 1 || text.back() != '\n' ||
        text.substr(crc_pos + 9, 8) != hex8(store_format::crc32(std::string_view(text).substr(0, crc_pos)))) {
      throw Error(Errc::StoreCorrupt, "meta checksum mismatch in " + meta_path().string());
    }
    std::optional<std::size_t> count;
    std::optional<int> version;
    std::istringstream in(text.substr(0, crc_pos));
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw Error(Errc::StoreCorrupt, "malformed meta line");
      const auto k = line.substr(0, eq);
      const auto v = line.substr(eq + 1);
      if (k == "format_version") version = field_int<int>(v);
      else if (k == "records") count = field_int<std::size_t>(v);
      else if (k == "repo") {
        const auto stored = store_format::unescape_field(v);
        if (repo_id.empty()) repo_id = stored;
      }
    }
    if (version != store_format::kVersion) throw Error(Errc::StoreCorrupt, "unsupported store format version");
    if (!count) throw Error(Errc::StoreCorrupt, "meta lacks record count");
    return *count;
  }

  void apply(const LogLine& l, std::uint64_t offset, std::uint32_t len) {
    auto& bucket = index[bucket_id(l.key.intro_sha, l.key.path)];
    if (l.tag == 'R') {
      check_disjoint(bucket, l.key, [](const Entry& e) { return e.new_end; });
      bucket.emplace(l.key.new_start, Entry{l.key.new_end, offset, len, std::nullopt, 0});
      ++hunks;
      return;
    }
    const auto it = bucket.find(l.key.new_start);
    if (it == bucket.end() || it->second.new_end != l.key.new_end) {
      throw Error(Errc::StoreCorrupt, "modification of unknown hunk " + describe(l.key));
    }
    if (it->second.mod_offset) throw Error(Errc::StoreCorrupt, "hunk modified twice " + describe(l.key));
    it->second.mod_offset = offset;
    it->second.mod_len = len;
  }

  void replay(std::size_t expected_records) {
    const auto text = read_whole(log_path());
    if (!text.empty() && text.back() != '\n') throw Error(Errc::StoreCorrupt, "truncated record at end of log");
    std::size_t pos = 0;
    std::size_t n = 0;
    while (pos < text.size()) {
      const auto end = text.find('\n', pos);
      const auto len = static_cast<std::uint32_t>(end - pos + 1);
      try {
        apply(parse_log_line(std::string_view(text).substr(pos, end - pos)), pos, len);
      } catch (const Error& e) {
        if (e.code() == Errc::StoreCorrupt) throw;
        throw Error(Errc::StoreCorrupt, std::string("inconsistent log: ") + e.what());
      }
      pos = end + 1;
      ++n;
    }
    if (n != expected_records) {
      throw Error(Errc::StoreCorrupt, "log holds " + std::to_string(n) + " records, meta expects " +
                                          std::to_string(expected_records));
    }
    records = n;
    log_size = text.size();
  }
};

DiskHunkIndex::DiskHunkIndex(const fs::path& store_dir, const std::string& repo_id, std::size_t cache_buckets,
                             bool truncate)
    : impl_(std::make_unique<Impl>()) {
  auto& m = *impl_;
  m.dir = store_dir;
  m.repo_id = repo_id;
  m.capacity = std::max<std::size_t>(1, cache_buckets);

  std::error_code ec;
  fs::create_directories(store_dir, ec);
  if (ec || !fs::is_directory(store_dir)) {
    throw Error(Errc::StoreUnwritable, "cannot create store directory " + store_dir.string());
  }
  const bool exists = fs::exists(m.log_path()) || fs::exists(m.meta_path());
  if (exists && !truncate) {
    if (!fs::exists(m.meta_path()) || !fs::exists(m.log_path())) {
      throw Error(Errc::StoreCorrupt, "incomplete store in " + store_dir.string());
    }
    m.replay(m.read_meta());
  }

  const int flags = O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC | (exists && truncate ? O_TRUNC : 0);
  m.write_fd = Fd(::open(m.log_path().c_str(), flags, 0644));
  if (m.write_fd.get() < 0) throw Error(Errc::StoreUnwritable, "cannot open " + m.log_path().string());
  m.read_fd = Fd(::open(m.log_path().c_str(), O_RDONLY | O_CLOEXEC));
  if (m.read_fd.get() < 0) throw Error(Errc::StoreUnwritable, "cannot read " + m.log_path().string());
  if (!exists || truncate) m.write_meta();
}

DiskHunkIndex::~DiskHunkIndex() {
  try {
    flush();
  } catch (...) {
  }
}

void DiskHunkIndex::flush() {
  std::unique_lock lock(impl_->mu);
  if (impl_->write_fd.get() >= 0) ::fdatasync(impl_->write_fd.get());
  impl_->write_meta();
}

void DiskHunkIndex::register_hunk(const HunkRecord& record) {
  validate_new_record(record);
  auto& m = *impl_;
  std::unique_lock lock(m.mu);
  const auto id = bucket_id(record.key.intro_sha, record.key.path);
  auto& bucket = m.index[id];
  check_disjoint(bucket, record.key, [](const Impl::Entry& e) { return e.new_end; });
  const auto line = register_line(record);
  const auto offset = m.log_size;
  m.append(line);
  bucket.emplace(record.key.new_start,
                 Impl::Entry{record.key.new_end, offset, static_cast<std::uint32_t>(line.size()), std::nullopt, 0});
  ++m.hunks;
  m.update_cache(id, record);
}

std::optional<HunkRecord> DiskHunkIndex::lookup(std::string_view origin_sha, std::string_view path,
                                                int line) const {
  const auto& m = *impl_;
  std::shared_lock lock(m.mu);
  const auto id = bucket_id(origin_sha, path);
  const auto b = m.index.find(id);
  if (b == m.index.end()) return std::nullopt;
  const auto it = find_containing(b->second, line, [](const Impl::Entry& e) { return e.new_end; });
  if (it == b->second.end()) return std::nullopt;
  return m.cached_record(id, b->second, it->first);
}

MarkResult DiskHunkIndex::mark_modified(const HunkKey& key, const std::string& mod_sha, Timestamp mod_ts) {
  auto& m = *impl_;
  std::unique_lock lock(m.mu);
  const auto id = bucket_id(key.intro_sha, key.path);
  const auto b = m.index.find(id);
  if (b == m.index.end()) throw Error(Errc::UnknownKey, describe(key));
  const auto it = b->second.find(key.new_start);
  if (it == b->second.end() || it->second.new_end != key.new_end) throw Error(Errc::UnknownKey, describe(key));
  if (it->second.mod_offset) return MarkResult::AlreadyModified;
  if (mod_sha == key.intro_sha) throw Error(Errc::DomainError, "hunk modified by its own commit " + describe(key));

  const Modification mod{mod_sha, mod_ts};
  const auto line = mark_line(key, mod);
  const auto offset = m.log_size;
  m.append(line);
  it->second.mod_offset = offset;
  it->second.mod_len = static_cast<std::uint32_t>(line.size());
  {
    std::lock_guard cache_lock(m.cache_mu);
    if (const auto c = m.cache_pos.find(id); c != m.cache_pos.end()) {
      c->second->second.at(key.new_start).first_mod = mod;
    }
  }
  return MarkResult::Recorded;
}

std::vector<HunkRecord> DiskHunkIndex::iterate_all() const {
  const auto& m = *impl_;
  std::shared_lock lock(m.mu);
  // One sequential pass over the log beats a read per record.
  const auto text = m.read_at(0, static_cast<std::size_t>(m.log_size));
  std::unordered_map<std::string, std::map<int, HunkRecord>> by_bucket;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    const auto l = parse_log_line(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    auto& bucket = by_bucket[bucket_id(l.key.intro_sha, l.key.path)];
    if (l.tag == 'R') {
      bucket.emplace(l.key.new_start, HunkRecord{l.key, l.ts, l.text, std::nullopt});
    } else {
      bucket.at(l.key.new_start).first_mod = Modification{l.text, l.ts};
    }
  }
  std::vector<HunkRecord> out;
  out.reserve(m.hunks);
  for (auto& [id, bucket] : by_bucket) {
    for (auto& [start, r] : bucket) out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), iteration_less);
  return out;
}

std::size_t DiskHunkIndex::size() const {
  std::shared_lock lock(impl_->mu);
  return impl_->hunks;
}

CacheStats DiskHunkIndex::cache_stats() const {
  std::lock_guard lock(impl_->cache_mu);
  CacheStats s = impl_->stats;
  s.resident_buckets = impl_->lru.size();
  return s;
}

const std::string& DiskHunkIndex::repo_id() const { return impl_->repo_id; }

std::unique_ptr<HunkIndex> open_backend(const BackendOptions& opts) {
  if (opts.kind == BackendKind::Memory) return std::make_unique<MemoryHunkIndex>();
  if (!opts.store_path) throw Error(Errc::StoreUnwritable, "disk backend requires a store path");
  return std::make_unique<DiskHunkIndex>(*opts.store_path, opts.repo_id, opts.cache_buckets, opts.truncate);
}

}  // namespace ttm
