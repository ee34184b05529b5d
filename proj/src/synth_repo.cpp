#include "ttm/synth_repo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ttm/error.hpp"
#include "ttm/process.hpp"

namespace ttm {
namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(EditOp op) {
  switch (op) {
    case EditOp::Create: return "create";
    case EditOp::Add: return "add";
    case EditOp::Replace: return "replace";
    case EditOp::Delete: return "delete";
    case EditOp::DeleteFile: return "delete_file";
  }
  return "add";
}

std::optional<EditOp> parse_edit_op(std::string_view name) {
  for (auto op : {EditOp::Create, EditOp::Add, EditOp::Replace, EditOp::Delete, EditOp::DeleteFile}) {
    if (to_string(op) == name) return op;
  }
  return std::nullopt;
}

void validate(const SynthSpec& s) {
  auto fail = [](const std::string& what) { throw Error(Errc::DomainError, "synthetic spec: " + what); };
  const auto& m = s.edit_mix;
  for (double f : {m.add, m.replace, m.del, s.delete_file_fraction}) {
    if (!(f >= 0.0 && f <= 1.0)) fail("fractions must lie in [0, 1]");
  }
  if (std::abs(m.add + m.replace + m.del - 1.0) > 1e-9) fail("edit mix must sum to 1");
  if (s.n_commits < 1 || s.n_devs < 1 || s.files < 1) fail("counts must be at least 1");
  if (s.lines_per_hunk.lo < 1 || s.lines_per_hunk.hi < s.lines_per_hunk.lo) fail("bad lines_per_hunk");
  if (s.inter_commit_seconds.lo < 1 || s.inter_commit_seconds.hi < s.inter_commit_seconds.lo) {
    fail("inter_commit_seconds must be a positive range");
  }
  if (s.hunks_per_commit.lo < 1 || s.hunks_per_commit.hi < s.hunks_per_commit.lo) fail("bad hunks_per_commit");
  if (s.max_lines_per_file < s.lines_per_hunk.hi) fail("max_lines_per_file below lines_per_hunk");
  if (s.warmup_commits < 0) fail("warmup_commits must not be negative");
}

std::size_t Manifest::hunks_introduced() const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [](const EditEvent& e) { return e.new_len > 0; }));
}

std::string manifest_to_jsonl(const Manifest& m) {
  std::string out = json{{"schema_version", Manifest::kSchemaVersion},
                         {"seed", m.seed},
                         {"n_commits", m.n_commits},
                         {"n_devs", m.n_devs}}
                        .dump();
  out.push_back('\n');
  for (const auto& e : m.events) {
    out += json{{"commit_index", e.commit_index},
                {"sha", e.sha},
                {"ts", e.ts},
                {"author", e.author},
                {"file", e.file},
                {"op", to_string(e.op)},
                {"old_range", {e.old_start, e.old_len}},
                {"new_range", {e.new_start, e.new_len}}}
               .dump();
    out.push_back('\n');
  }
  return out;
}

Manifest manifest_from_jsonl(std::string_view text) {
  Manifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = true;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = json::parse(line);
      if (header) {
        if (j.at("schema_version").get<int>() != Manifest::kSchemaVersion) {
          throw Error(Errc::ParseError, "unsupported manifest schema");
        }
        m.seed = j.at("seed").get<std::uint64_t>();
        m.n_commits = j.at("n_commits").get<int>();
        m.n_devs = j.at("n_devs").get<int>();
        header = false;
        continue;
      }
      EditEvent e;
      e.commit_index = j.at("commit_index").get<int>();
      e.sha = j.at("sha").get<std::string>();
      e.ts = j.at("ts").get<Timestamp>();
      e.author = j.at("author").get<std::string>();
      e.file = j.at("file").get<std::string>();
      const auto op = parse_edit_op(j.at("op").get<std::string>());
      if (!op) throw Error(Errc::ParseError, "unknown edit op");
      e.op = *op;
      e.old_start = j.at("old_range").at(0).get<int>();
      e.old_len = j.at("old_range").at(1).get<int>();
      e.new_start = j.at("new_range").at(0).get<int>();
      e.new_len = j.at("new_range").at(1).get<int>();
      m.events.push_back(std::move(e));
    }
  } catch (const json::exception& ex) {
    throw Error(Errc::ParseError, std::string("manifest: ") + ex.what());
  }
  if (header) throw Error(Errc::ParseError, "manifest without header");
  return m;
}

// ---------------------------------------------------------------------------
// generation

namespace {

// Portable draws: mt19937_64 output is fixed by the standard, the
// distributions are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(gen_() % span);
  }
  std::int64_t between(const IntRange& r) { return between(r.lo, r.hi); }
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  std::uint64_t bits() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

struct PlannedEdit {
  EditOp op = EditOp::Add;
  int old_start = 0;  // Add: insert after this line
  int old_len = 0;
  int new_len = 0;

  // Footprint on a doubled axis: line i -> 2i, the gap after line p -> 2p+1.
  [[nodiscard]] int lo() const { return old_len == 0 ? 2 * old_start + 1 : 2 * old_start; }
  [[nodiscard]] int hi() const { return old_len == 0 ? 2 * old_start + 1 : 2 * (old_start + old_len - 1); }
};

// True when an untouched line separates the two edits, so that git reports
// them as distinct zero-context hunks.
bool separated(const PlannedEdit& a, const PlannedEdit& b) {
  const PlannedEdit& first = a.lo() <= b.lo() ? a : b;
  const PlannedEdit& second = a.lo() <= b.lo() ? b : a;
  const int gap_line = first.hi() % 2 == 0 ? first.hi() + 2 : first.hi() + 1;
  return gap_line < second.lo();
}

struct FileState {
  bool exists = false;
  std::vector<std::string> lines;
};

std::string file_path(int index) { return "mod" + std::to_string(index % 3) + "/f" + std::to_string(index) + ".txt"; }

std::string blob(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) {
    s += l;
    s.push_back('\n');
  }
  return s;
}

void append_data(std::string& stream, const std::string& payload) {
  stream += "data " + std::to_string(payload.size()) + "\n";
  stream += payload;
  stream.push_back('\n');
}

ProcessResult git_at(const fs::path& dir, std::vector<std::string> args, std::string stdin_data = {}) {
  std::vector<std::string> argv{"git", "-C", dir.string()};
  argv.insert(argv.end(), std::make_move_iterator(args.begin()), std::make_move_iterator(args.end()));
  ProcessOptions opts;
  opts.stdin_data = std::move(stdin_data);
  opts.env = {{"LC_ALL", "C"}, {"GIT_TERMINAL_PROMPT", "0"}};
  return run_process(argv, opts);
}

void require_ok(const ProcessResult& r, const std::string& what) {
  if (r.exit_code != 0) throw Error(Errc::GitWriteFailure, what + ": " + r.err);
}

}  // namespace

Manifest generate(const SynthSpec& spec, const fs::path& out_path) {
  validate(spec);
  std::error_code ec;
  if (fs::exists(out_path, ec) && !(fs::is_directory(out_path) && fs::is_empty(out_path))) {
    throw Error(Errc::PathNotEmpty, out_path.string());
  }
  fs::create_directories(out_path, ec);
  if (ec) throw Error(Errc::GitWriteFailure, "cannot create " + out_path.string() + ": " + ec.message());

  Rng rng(spec.seed);
  Manifest manifest;
  manifest.seed = spec.seed;
  manifest.n_commits = spec.n_commits;
  manifest.n_devs = spec.n_devs;

  std::vector<FileState> files(static_cast<std::size_t>(spec.files));
  std::string stream;
  Timestamp ts = spec.start_ts;
  const int max_lines = spec.max_lines_per_file;

  for (int c = 0; c < spec.n_commits; ++c) {
    if (c > 0) ts += rng.between(spec.inter_commit_seconds);
    const int dev = c % spec.n_devs;
    const std::string author = "dev" + std::to_string(dev) + "@synth.test";

    std::map<int, std::vector<PlannedEdit>> plans;
    const auto wanted = rng.between(spec.hunks_per_commit);
    // A commit must change something; keep drawing until it does.
    for (int attempt = 0; attempt < wanted || (plans.empty() && attempt < wanted + 64); ++attempt) {
      const int f = static_cast<int>(rng.between(0, spec.files - 1));
      auto& state = files[static_cast<std::size_t>(f)];
      auto& planned = plans[f];
      const bool whole_file = std::any_of(planned.begin(), planned.end(), [](const PlannedEdit& p) {
        return p.op == EditOp::Create || p.op == EditOp::DeleteFile;
      });
      if (whole_file) continue;
      const int n = static_cast<int>(state.lines.size());
      const int m = static_cast<int>(rng.between(spec.lines_per_hunk));

      if (!state.exists) {
        if (planned.empty()) planned.push_back(PlannedEdit{EditOp::Create, 0, 0, m});
        continue;
      }
      const bool warmup = c < spec.warmup_commits;
      if (!warmup && n > 0 && planned.empty() && rng.unit() < spec.delete_file_fraction) {
        planned.push_back(PlannedEdit{EditOp::DeleteFile, 1, n, 0});
        continue;
      }

      const double u = rng.unit();
      EditOp op = warmup || u < spec.edit_mix.add ? EditOp::Add
                  : u < spec.edit_mix.add + spec.edit_mix.replace ? EditOp::Replace
                                                                   : EditOp::Delete;
      int growth = 0;
      for (const auto& p : planned) growth += p.new_len - p.old_len;
      if (op == EditOp::Add && n + growth + m > max_lines) op = EditOp::Replace;
      if (op != EditOp::Add && n == 0) op = EditOp::Add;
      if (op == EditOp::Add && n + growth + m > max_lines) continue;

      for (int tries = 0; tries < 16; ++tries) {
        PlannedEdit e{op, 0, 0, 0};
        if (op == EditOp::Add) {
          e.old_start = static_cast<int>(rng.between(0, n));
          e.new_len = m;
        } else {
          e.old_start = static_cast<int>(rng.between(1, n));
          e.old_len = std::min<int>(static_cast<int>(rng.between(spec.lines_per_hunk)), n - e.old_start + 1);
          e.new_len = op == EditOp::Replace ? m : 0;
          if (op == EditOp::Replace && n + growth + m - e.old_len > max_lines) continue;
        }
        if (std::all_of(planned.begin(), planned.end(), [&](const PlannedEdit& p) { return separated(p, e); })) {
          planned.push_back(e);
          break;
        }
      }
    }

    stream += "commit refs/heads/main\nmark :" + std::to_string(c + 1) + "\n";
    const std::string ident = "Dev" + std::to_string(dev) + " <" + author + "> " + std::to_string(ts) + " +0000\n";
    stream += "author " + ident + "committer " + ident;
    append_data(stream, "synthetic commit " + std::to_string(c) + "\n");
    if (c > 0) stream += "from :" + std::to_string(c) + "\n";

    std::vector<EditEvent> commit_events;
    int edit_no = 0;
    for (auto& [f, planned] : plans) {
      if (planned.empty()) continue;
      auto& state = files[static_cast<std::size_t>(f)];
      const std::string path = file_path(f);
      std::sort(planned.begin(), planned.end(),
                [](const PlannedEdit& a, const PlannedEdit& b) { return a.lo() < b.lo(); });

      auto fresh_lines = [&](int count) {
        std::vector<std::string> out;
        for (int i = 0; i < count; ++i) {
          char tag[17];
          std::snprintf(tag, sizeof tag, "%016llx", static_cast<unsigned long long>(rng.bits()));
          out.push_back("c" + std::to_string(c) + " e" + std::to_string(edit_no) + " l" + std::to_string(i) +
                        " " + tag);
        }
        ++edit_no;
        return out;
      };
      auto event = [&](const PlannedEdit& p, int new_start) {
        return EditEvent{c, "", ts, author, path, p.op, p.old_start, p.old_len, new_start, p.new_len};
      };

      if (planned.front().op == EditOp::DeleteFile) {
        commit_events.push_back(event(planned.front(), 0));
        state = FileState{};
        stream += "D " + path + "\n";
        continue;
      }
      if (planned.front().op == EditOp::Create) {
        state.exists = true;
        state.lines = fresh_lines(planned.front().new_len);
        commit_events.push_back(event(planned.front(), 1));
        stream += "M 100644 inline " + path + "\n";
        append_data(stream, blob(state.lines));
        continue;
      }

      std::vector<std::string> next;
      int copied = 0;  // old lines consumed so far
      for (const auto& p : planned) {
        const int keep_until = p.old_len == 0 ? p.old_start : p.old_start - 1;
        for (; copied < keep_until; ++copied) next.push_back(state.lines[static_cast<std::size_t>(copied)]);
        copied += p.old_len;
        const int new_start = p.new_len > 0 ? static_cast<int>(next.size()) + 1 : static_cast<int>(next.size());
        for (auto& l : fresh_lines(p.new_len)) next.push_back(std::move(l));
        commit_events.push_back(event(p, new_start));
      }
      for (; copied < static_cast<int>(state.lines.size()); ++copied) {
        next.push_back(state.lines[static_cast<std::size_t>(copied)]);
      }
      state.lines = std::move(next);
      stream += "M 100644 inline " + path + "\n";
      append_data(stream, blob(state.lines));
    }
    std::stable_sort(commit_events.begin(), commit_events.end(), [](const EditEvent& a, const EditEvent& b) {
      return std::tie(a.file, a.old_start) < std::tie(b.file, b.old_start);
    });
    for (auto& e : commit_events) manifest.events.push_back(std::move(e));
    stream.push_back('\n');
  }

  require_ok(git_at(out_path, {"init", "--bare", "-q"}), "git init");
  const auto marks = out_path / "synth-marks";
  require_ok(git_at(out_path, {"fast-import", "--quiet", "--date-format=raw", "--export-marks=" + marks.string()},
                    stream),
             "git fast-import");
  require_ok(git_at(out_path, {"symbolic-ref", "HEAD", "refs/heads/main"}), "git symbolic-ref");
  // Changed-path Bloom filters keep per-file blame cheap on long histories.
  require_ok(git_at(out_path, {"commit-graph", "write", "--reachable", "--changed-paths"}), "git commit-graph");

  std::vector<std::string> shas(static_cast<std::size_t>(spec.n_commits));
  {
    std::ifstream in(marks);
    std::string mark, sha;
    while (in >> mark >> sha) {
      const int idx = std::stoi(mark.substr(1)) - 1;
      if (idx >= 0 && idx < spec.n_commits) shas[static_cast<std::size_t>(idx)] = sha;
    }
  }
  fs::remove(marks, ec);
  for (auto& e : manifest.events) e.sha = shas[static_cast<std::size_t>(e.commit_index)];

  std::ofstream(out_path / "manifest.jsonl", std::ios::binary) << manifest_to_jsonl(manifest);
  return manifest;
}

// ---------------------------------------------------------------------------
// oracle

namespace {

struct OracleHunk {
  TTMRecord record;
  std::optional<Timestamp> mod_ts;
  std::vector<int> touches;
};

std::vector<OracleHunk> replay(const Manifest& manifest) {
  std::vector<OracleHunk> hunks;
  std::map<std::string, std::vector<std::size_t>> owners;  // file -> hunk id per line

  const auto& ev = manifest.events;
  std::size_t i = 0;
  int last_commit = -1;
  while (i < ev.size()) {
    const int c = ev[i].commit_index;
    if (c <= last_commit) throw Error(Errc::NonLinearHistory, "manifest commits out of order");
    last_commit = c;
    std::size_t j = i;
    while (j < ev.size() && ev[j].commit_index == c) {
      if (ev[j].sha != ev[i].sha || ev[j].ts != ev[i].ts) {
        throw Error(Errc::NonLinearHistory, "inconsistent events for commit " + std::to_string(c));
      }
      ++j;
    }

    // Phase A over every file first, so a commit never modifies its own hunks.
    std::set<std::size_t> touched;
    for (std::size_t k = i; k < j; ++k) {
      const auto& e = ev[k];
      if (e.old_len == 0) continue;
      auto& lines = owners[e.file];
      if (e.old_start < 1 || e.old_start + e.old_len - 1 > static_cast<int>(lines.size())) {
        throw Error(Errc::NonLinearHistory, "event outside file bounds in commit " + std::to_string(c));
      }
      for (int l = e.old_start; l < e.old_start + e.old_len; ++l) touched.insert(lines[static_cast<std::size_t>(l - 1)]);
    }
    for (const auto id : touched) {
      auto& h = hunks[id];
      h.touches.push_back(c);
      if (h.mod_ts) continue;
      h.mod_ts = ev[i].ts;
      h.record.first_mod_sha = ev[i].sha;
      h.record.ttm_seconds = ev[i].ts - h.record.intro_ts;
      h.record.outcome = h.record.ttm_seconds >= 0 ? Outcome::Measured : Outcome::NegativeDelta;
    }

    // Phase B: rebuild each touched file with position shifting.
    std::size_t k = i;
    while (k < j) {
      const std::string& file = ev[k].file;
      std::size_t end = k;
      while (end < j && ev[end].file == file) ++end;
      auto& old_lines = owners[file];
      std::vector<std::size_t> next;
      int copied = 0;
      bool removed = false;
      for (std::size_t e_idx = k; e_idx < end; ++e_idx) {
        const auto& e = ev[e_idx];
        if (e.op == EditOp::DeleteFile) removed = true;
        const int keep_until = e.old_len == 0 ? e.old_start : e.old_start - 1;
        for (; copied < keep_until; ++copied) next.push_back(old_lines[static_cast<std::size_t>(copied)]);
        copied += e.old_len;
        if (e.new_len == 0) continue;
        if (e.new_start != static_cast<int>(next.size()) + 1) {
          throw Error(Errc::NonLinearHistory, "event new range disagrees with replay in " + file);
        }
        OracleHunk h;
        h.record.key = HunkKey{e.sha, e.file, e.new_start, e.new_start + e.new_len - 1};
        h.record.author_id = e.author;
        h.record.intro_ts = e.ts;
        const auto id = hunks.size();
        hunks.push_back(std::move(h));
        next.insert(next.end(), static_cast<std::size_t>(e.new_len), id);
      }
      for (; copied < static_cast<int>(old_lines.size()); ++copied) {
        next.push_back(old_lines[static_cast<std::size_t>(copied)]);
      }
      if (removed) owners.erase(file);
      else old_lines = std::move(next);
      k = end;
    }
    i = j;
  }

  std::sort(hunks.begin(), hunks.end(), [](const OracleHunk& a, const OracleHunk& b) {
    const auto& x = a.record;
    const auto& y = b.record;
    return std::tie(x.intro_ts, x.key.intro_sha, x.key.path, x.key.new_start) <
           std::tie(y.intro_ts, y.key.intro_sha, y.key.path, y.key.new_start);
  });
  return hunks;
}

}  // namespace

std::vector<TTMRecord> oracle_ttm(const Manifest& manifest) {
  std::vector<TTMRecord> out;
  for (auto& h : replay(manifest)) out.push_back(std::move(h.record));
  return out;
}

std::vector<std::vector<int>> oracle_touches(const Manifest& manifest) {
  std::vector<std::vector<int>> out;
  for (auto& h : replay(manifest)) out.push_back(std::move(h.touches));
  return out;
}

}  // namespace ttm
