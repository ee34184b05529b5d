#include "ttm/ttm_engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <thread>
#include <tuple>
#include <unordered_set>

#include "ttm/error.hpp"

namespace ttm {
namespace fs = std::filesystem;

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Measured: return "measured";
    case Outcome::NegativeDelta: return "negative";
    case Outcome::Censored: return "censored";
  }
  return "censored";
}

std::optional<Outcome> parse_outcome(std::string_view name) {
  if (name == "measured") return Outcome::Measured;
  if (name == "negative") return Outcome::NegativeDelta;
  if (name == "censored") return Outcome::Censored;
  return std::nullopt;
}

namespace {

struct BlameJob {
  std::string path;
  std::vector<LineRange> ranges;
  std::vector<std::vector<BlameSpan>> spans;
  std::exception_ptr error;
};

std::size_t effective_workers(std::size_t requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void run_jobs(std::vector<BlameJob>& jobs, std::size_t workers,
              const std::function<void(BlameJob&)>& body) {
  const std::size_t n_threads = std::min(effective_workers(workers), jobs.size());
  if (n_threads <= 1) {
    for (auto& j : jobs) body(j);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        try {
          body(jobs[i]);
        } catch (...) {
          jobs[i].error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
}

struct KeyLess {
  bool operator()(const HunkKey& a, const HunkKey& b) const {
    return std::tie(a.intro_sha, a.path, a.new_start, a.new_end) <
           std::tie(b.intro_sha, b.path, b.new_start, b.new_end);
  }
};

}  // namespace

CommitCounters process_commit(const RepoSource& repo, const CommitMeta& commit, HunkIndex& index,
                              const EngineOptions& opts, bool first_parent_blame) {
  CommitCounters counters;
  const CommitDiff diff = repo.diff_commit(commit, 0);
  counters.binary_files_skipped = static_cast<std::size_t>(diff.binary_files_skipped);
  counters.submodules_skipped = static_cast<std::size_t>(diff.submodules_skipped);

  // Phase A: whatever the old side of a hunk held belonged to some earlier
  // hunk, which is modified by this commit.
  if (!commit.is_root()) {
    std::map<std::string, std::vector<LineRange>> by_path;
    for (const auto& f : diff.files) {
      if (!f.old_path) continue;
      for (const auto& h : f.hunks) {
        if (h.old_len > 0) by_path[*f.old_path].push_back(LineRange{h.old_start, h.old_len});
      }
    }
    std::vector<BlameJob> jobs;
    jobs.reserve(by_path.size());
    for (auto& [path, ranges] : by_path) jobs.push_back(BlameJob{path, std::move(ranges), {}, nullptr});

    const std::string& parent = commit.parents.front();
    run_jobs(jobs, opts.workers, [&](BlameJob& job) {
      job.spans = repo.blame_ranges(parent, job.path, job.ranges, first_parent_blame);
    });

    std::set<HunkKey, KeyLess> touched;
    for (const auto& job : jobs) {
      if (job.error) std::rethrow_exception(job.error);
      for (const auto& per_range : job.spans) {
        for (const auto& span : per_range) {
          int offset = 0;
          while (offset < span.span_len) {
            const int line = span.origin_start + offset;
            const auto owner = index.lookup(span.origin_sha, span.origin_path, line);
            if (!owner) {
              ++counters.unattributed_lines;
              ++offset;
              continue;
            }
            // The rest of this span that falls inside the same hunk needs no lookup.
            const int covered = std::min(span.span_len - offset, owner->key.new_end - line + 1);
            counters.lines_attributed += static_cast<std::size_t>(covered);
            offset += covered;
            touched.insert(owner->key);
          }
        }
      }
    }
    for (const auto& key : touched) {
      if (index.mark_modified(key, commit.sha, commit.committer_ts) == MarkResult::Recorded) {
        ++counters.modifications_recorded;
      } else {
        ++counters.already_modified;
      }
    }
  }

  // Phase B: the new side of every hunk is a fresh hunk owned by this commit.
  for (const auto& f : diff.files) {
    if (!f.new_path) continue;
    for (const auto& h : f.hunks) {
      if (h.new_len <= 0) continue;
      index.register_hunk(HunkRecord{HunkKey{commit.sha, *f.new_path, h.new_start, h.new_start + h.new_len - 1},
                                     commit.committer_ts, commit.author_id, std::nullopt});
      ++counters.hunks_registered;
    }
  }
  return counters;
}

RunResult process_repository(const fs::path& repo_path, const RangeOptions& range, const BackendOptions& backend,
                             const EngineOptions& opts) {
  const auto started = std::chrono::steady_clock::now();
  const RepoSource repo(repo_path);
  const auto commits = repo.list_commits(range);

  BackendOptions store_opts = backend;
  store_opts.truncate = true;  // a run always starts from an empty store
  if (store_opts.repo_id.empty()) store_opts.repo_id = repo.path().string();

  RunResult result;
  result.meta.backend_kind = backend.kind;
  result.meta.commits_total_in_range = commits.size();
  result.meta.end_of_range_ts = std::numeric_limits<Timestamp>::min();

  auto discard_store = [&] {
    result.index.reset();
    if (store_opts.kind == BackendKind::Disk && store_opts.store_path) {
      std::error_code ec;
      fs::remove(*store_opts.store_path / store_format::kLogName, ec);
      fs::remove(*store_opts.store_path / store_format::kMetaName, ec);
    }
  };

  try {
    result.index = open_backend(store_opts);
    std::unordered_set<std::string> authors;
    for (const auto& c : commits) {
      const auto counters = process_commit(repo, c, *result.index, opts, range.first_parent);
      auto& m = result.meta;
      ++m.commits_processed;
      m.hunks_registered += counters.hunks_registered;
      m.binary_files_skipped += counters.binary_files_skipped;
      m.submodules_skipped += counters.submodules_skipped;
      m.unattributed_lines += counters.unattributed_lines;
      m.modifications_recorded += counters.modifications_recorded;
      m.end_of_range_ts = std::max(m.end_of_range_ts, c.committer_ts);
      authors.insert(c.author_id);
    }
    result.meta.distinct_authors = authors.size();
    result.index->flush();
  } catch (...) {
    discard_store();
    throw;
  }
  result.meta.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::vector<TTMRecord> collect_records(const HunkIndex& index, Timestamp end_of_range_ts) {
  std::vector<TTMRecord> out;
  for (auto& r : index.iterate_all()) {
    TTMRecord t;
    t.key = std::move(r.key);
    t.author_id = std::move(r.author_id);
    t.intro_ts = r.intro_ts;
    // A modification past the horizon was not observed within the range.
    if (r.first_mod && r.first_mod->ts <= end_of_range_ts) {
      t.ttm_seconds = r.first_mod->ts - r.intro_ts;
      t.outcome = t.ttm_seconds >= 0 ? Outcome::Measured : Outcome::NegativeDelta;
      t.first_mod_sha = std::move(r.first_mod->sha);
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace ttm
