#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ttm/ttm_engine.hpp"

namespace ttm {

struct EditMix {
  double add = 0.4;
  double replace = 0.4;
  double del = 0.2;
};

struct IntRange {
  std::int64_t lo = 1;
  std::int64_t hi = 1;
};

struct SynthSpec {
  std::uint64_t seed = 1;
  int n_commits = 10;  // T target
  int n_devs = 2;      // D target
  int files = 2;
  EditMix edit_mix;
  IntRange lines_per_hunk{1, 4};
  IntRange inter_commit_seconds{60, 86400};
  IntRange hunks_per_commit{1, 3};
  int max_lines_per_file = 60;
  double delete_file_fraction = 0.0;  // chance that an edit removes the whole file
  int warmup_commits = 0;             // leading commits that only add lines
  Timestamp start_ts = 1'600'000'000;
};

// Validates fractions and counts; throws Error(DomainError) when invalid.
void validate(const SynthSpec& spec);

enum class EditOp { Create, Add, Replace, Delete, DeleteFile };

std::string_view to_string(EditOp op);
std::optional<EditOp> parse_edit_op(std::string_view name);

/// One hunk-shaped edit as it appears in the commit's zero-context diff.
struct EditEvent {
  int commit_index = 0;
  std::string sha;
  Timestamp ts = 0;
  std::string author;
  std::string file;
  EditOp op = EditOp::Add;
  int old_start = 0;
  int old_len = 0;
  int new_start = 0;
  int new_len = 0;

  friend bool operator==(const EditEvent&, const EditEvent&) = default;
};

struct Manifest {
  static constexpr int kSchemaVersion = 1;
  std::uint64_t seed = 0;
  int n_commits = 0;
  int n_devs = 0;
  std::vector<EditEvent> events;  // ordered by commit, then file, then old_start

  [[nodiscard]] std::size_t hunks_introduced() const;
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

// Line-delimited JSON: one header object, then one object per event.
std::string manifest_to_jsonl(const Manifest& m);
Manifest manifest_from_jsonl(std::string_view text);

/// Writes a bare repository at out_path (which must be empty or absent)
/// with `n_commits` commits on refs/heads/main, and returns its manifest.
/// Identities and timestamps are pinned, so equal specs give equal shas.
/// The manifest is also stored as out_path/manifest.jsonl.
Manifest generate(const SynthSpec& spec, const std::filesystem::path& out_path);

// Ground truth by brute-force replay of the manifest: every introduced
// line is tracked by position, and a hunk is modified by the first later
// event that replaces or deletes any of its lines.
std::vector<TTMRecord> oracle_ttm(const Manifest& manifest);

// For each hunk (in oracle_ttm order), the commit indices of every later
// event touching its lines, ascending.
std::vector<std::vector<int>> oracle_touches(const Manifest& manifest);

}  // namespace ttm
