#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "ttm/hunk_index.hpp"
#include "ttm/repo_source.hpp"

namespace ttm {

enum class Outcome { Measured, NegativeDelta, Censored };

std::string_view to_string(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view name);

/// Per-hunk result. ttm_seconds and first_mod_sha are meaningful only when
/// the hunk was modified (Measured or NegativeDelta).
struct TTMRecord {
  HunkKey key;
  std::string author_id;
  Timestamp intro_ts = 0;
  Outcome outcome = Outcome::Censored;
  std::int64_t ttm_seconds = 0;
  std::string first_mod_sha;

  friend bool operator==(const TTMRecord&, const TTMRecord&) = default;
};

struct RunMetadata {
  std::size_t commits_processed = 0;
  std::size_t hunks_registered = 0;     // H
  std::size_t distinct_authors = 0;     // D
  std::size_t commits_total_in_range = 0;  // T
  std::size_t binary_files_skipped = 0;
  std::size_t submodules_skipped = 0;
  std::size_t unattributed_lines = 0;
  std::size_t modifications_recorded = 0;
  Timestamp end_of_range_ts = 0;        // committer time of the last analyzed commit
  double wall_seconds = 0.0;
  BackendKind backend_kind = BackendKind::Memory;
};

struct CommitCounters {
  std::size_t hunks_registered = 0;
  std::size_t lines_attributed = 0;
  std::size_t unattributed_lines = 0;
  std::size_t modifications_recorded = 0;
  std::size_t already_modified = 0;
  std::size_t binary_files_skipped = 0;
  std::size_t submodules_skipped = 0;
};

struct EngineOptions {
  // Concurrent blame queries per commit; 0 picks the hardware concurrency.
  std::size_t workers = 1;
};

struct RunResult {
  std::unique_ptr<HunkIndex> index;
  RunMetadata meta;
};

// Attributes `commit`'s changes to earlier hunks, then registers its own.
// Every chronologically earlier commit must have been processed already.
CommitCounters process_commit(const RepoSource& repo, const CommitMeta& commit, HunkIndex& index,
                              const EngineOptions& opts = {}, bool first_parent_blame = true);

// Walks the range oldest to newest. On failure nothing is returned; a disk
// store created for the run is removed.
RunResult process_repository(const std::filesystem::path& repo_path, const RangeOptions& range,
                             const BackendOptions& backend, const EngineOptions& opts = {});

// One record per registered hunk in iterate_all() order. A hunk counts as
// censored when no modification is recorded at or before end_of_range_ts.
std::vector<TTMRecord> collect_records(const HunkIndex& index, Timestamp end_of_range_ts);

}  // namespace ttm
