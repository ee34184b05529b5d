#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ttm {

using Timestamp = std::int64_t;  // seconds since the epoch, UTC

struct CommitMeta {
  std::string sha;
  std::vector<std::string> parents;
  Timestamp committer_ts = 0;
  std::string author_id;  // lowercased email, or lowercased name when the email is empty

  [[nodiscard]] bool is_root() const { return parents.empty(); }
  friend bool operator==(const CommitMeta&, const CommitMeta&) = default;
};

// Line counts follow unified-diff conventions: an empty side reports the
// line *before* the change as its start (0 when the change is at the top).
struct DiffHunk {
  int old_start = 0;
  int old_len = 0;
  int new_start = 0;
  int new_len = 0;

  friend bool operator==(const DiffHunk&, const DiffHunk&) = default;
};

struct FilePatch {
  std::optional<std::string> old_path;  // absent for added files
  std::optional<std::string> new_path;  // absent for deleted files
  std::vector<DiffHunk> hunks;

  [[nodiscard]] bool is_rename() const { return old_path && new_path && *old_path != *new_path; }
  friend bool operator==(const FilePatch&, const FilePatch&) = default;
};

struct CommitDiff {
  std::vector<FilePatch> files;
  int binary_files_skipped = 0;
  int submodules_skipped = 0;
};

struct BlameSpan {
  std::string origin_sha;
  std::string origin_path;
  int origin_start = 0;
  int span_len = 0;
  int query_start = 0;

  friend bool operator==(const BlameSpan&, const BlameSpan&) = default;
};

struct LineRange {
  int start = 1;
  int len = 1;
};

struct RangeOptions {
  std::string branch = "HEAD";
  std::optional<Timestamp> since_ts;  // inclusive
  std::optional<Timestamp> until_ts;  // inclusive
  bool first_parent = true;
};

struct RepoSourceOptions {
  int rename_similarity = 50;  // percent
  std::string git_executable = "git";
};

/// Read-only access to a Git repository through the `git` executable.
///
/// Every query spawns its own git process and the object holds no mutable
/// state, so a single instance may be shared between worker threads.
class RepoSource {
 public:
  explicit RepoSource(std::filesystem::path repo_path, RepoSourceOptions opts = {});

  [[nodiscard]] const std::filesystem::path& path() const { return repo_path_; }
  [[nodiscard]] const RepoSourceOptions& options() const { return opts_; }

  // Oldest to newest. Parents always precede children; ties between
  // unrelated commits are broken by committer timestamp.
  [[nodiscard]] std::vector<CommitMeta> list_commits(const RangeOptions& range) const;

  // Zero-context diff of `commit` against parents[parent_index] (or the
  // empty tree for a root commit). Binary files and submodules are counted
  // and left out of `files`.
  [[nodiscard]] CommitDiff diff_commit(const CommitMeta& commit, std::size_t parent_index = 0) const;

  [[nodiscard]] std::vector<BlameSpan> blame_range(const std::string& commit_sha,
                                                   const std::string& file_path, int start,
                                                   int len, bool first_parent = false) const;

  // Blames several disjoint ranges of one file with a single git invocation.
  // The result is indexed like `ranges`; every entry tiles its range.
  [[nodiscard]] std::vector<std::vector<BlameSpan>> blame_ranges(
      const std::string& commit_sha, const std::string& file_path,
      const std::vector<LineRange>& ranges, bool first_parent = false) const;

  [[nodiscard]] std::string read_file(const std::string& commit_sha,
                                      const std::string& file_path) const;

  [[nodiscard]] std::string resolve(const std::string& rev) const;

 private:
  std::filesystem::path repo_path_;
  RepoSourceOptions opts_;
};

std::string normalize_author(std::string_view email, std::string_view name);

// Parses `git diff-tree -p` output produced with zero context lines.
CommitDiff parse_zero_context_patch(std::string_view patch);

// Parses `git blame --porcelain` output into one span per maximal run of
// lines that share origin commit and path with consecutive line numbers.
std::vector<BlameSpan> parse_blame_porcelain(std::string_view porcelain);

// Splits text into lines the way git counts them (a trailing newline does
// not start a new line).
std::vector<std::string> split_lines(std::string_view text);

}  // namespace ttm
