#include "ttm/repo_source.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_map>

#include "ttm/error.hpp"
#include "ttm/process.hpp"

namespace ttm {
namespace fs = std::filesystem;

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

template <typename Int>
Int parse_int(std::string_view s, std::string_view what) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(Errc::ObjectMissing, "cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

// Undoes git's C-style path quoting ("a\tb" and friends).
std::string unquote_path(std::string_view s) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') return std::string(s);
  s = s.substr(1, s.size() - 2);
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 >= s.size()) {
      out.push_back(s[i]);
      continue;
    }
    const char c = s[++i];
    switch (c) {
      case 'a': out.push_back('\a'); break;
      case 'b': out.push_back('\b'); break;
      case 'f': out.push_back('\f'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case 't': out.push_back('\t'); break;
      case 'v': out.push_back('\v'); break;
      default:
        if (c >= '0' && c <= '7' && i + 2 < s.size()) {
          const int v = (c - '0') * 64 + (s[i + 1] - '0') * 8 + (s[i + 2] - '0');
          out.push_back(static_cast<char>(v));
          i += 2;
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

// "--- a/path" / "+++ b/path"; nullopt for /dev/null.
std::optional<std::string> patch_side_path(std::string_view rest, std::string_view prefix) {
  if (!rest.empty() && rest.back() == '\t') rest.remove_suffix(1);
  if (rest == "/dev/null") return std::nullopt;
  std::string path = unquote_path(rest);
  if (starts_with(path, prefix)) path.erase(0, prefix.size());
  return path;
}

// Parses "-a,b" or "+c" into (start, len).
std::pair<int, int> parse_range(std::string_view token) {
  token.remove_prefix(1);
  const auto comma = token.find(',');
  if (comma == std::string_view::npos) return {parse_int<int>(token, "hunk start"), 1};
  return {parse_int<int>(token.substr(0, comma), "hunk start"),
          parse_int<int>(token.substr(comma + 1), "hunk length")};
}

struct BlameLine {
  std::string sha;
  std::string path;
  int origin_line = 0;
  int final_line = 0;
};

std::vector<BlameLine> parse_blame_lines(std::string_view porcelain) {
  std::vector<BlameLine> lines;
  std::unordered_map<std::string, std::string> path_of;
  BlameLine* current = nullptr;
  std::size_t pos = 0;
  while (pos < porcelain.size()) {
    auto end = porcelain.find('\n', pos);
    if (end == std::string_view::npos) end = porcelain.size();
    const std::string_view line = porcelain.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    if (line.front() == '\t') {
      // Content line closes the entry; the filename header may only have
      // been printed the first time this commit appeared.
      if (current != nullptr && current->path.empty()) {
        const auto it = path_of.find(current->sha);
        if (it == path_of.end()) throw Error(Errc::ObjectMissing, "blame entry without filename");
        current->path = it->second;
      }
      current = nullptr;
      continue;
    }
    if (current == nullptr) {
      const auto fields = split(line, ' ');
      if (fields.size() < 3 || fields[0].size() < 40) {
        throw Error(Errc::ObjectMissing, "unexpected blame header: " + std::string(line));
      }
      BlameLine entry;
      entry.sha = std::string(fields[0]);
      entry.origin_line = parse_int<int>(fields[1], "blame origin line");
      entry.final_line = parse_int<int>(fields[2], "blame final line");
      lines.push_back(std::move(entry));
      current = &lines.back();
      continue;
    }
    if (starts_with(line, "filename ")) {
      current->path = unquote_path(line.substr(9));
      path_of[current->sha] = current->path;
    }
  }
  return lines;
}

std::vector<BlameSpan> merge_blame_lines(const std::vector<BlameLine>& lines) {
  std::vector<BlameSpan> spans;
  for (const auto& l : lines) {
    if (!spans.empty()) {
      auto& last = spans.back();
      if (last.origin_sha == l.sha && last.origin_path == l.path &&
          last.origin_start + last.span_len == l.origin_line &&
          last.query_start + last.span_len == l.final_line) {
        ++last.span_len;
        continue;
      }
    }
    spans.push_back(BlameSpan{l.sha, l.path, l.origin_line, 1, l.final_line});
  }
  return spans;
}

}  // namespace

std::string normalize_author(std::string_view email, std::string_view name) {
  return email.empty() ? to_lower(name) : to_lower(email);
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    lines.emplace_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return lines;
}

CommitDiff parse_zero_context_patch(std::string_view patch) {
  CommitDiff diff;

  struct Pending {
    FilePatch file;
    bool added = false;
    bool deleted = false;
    bool binary = false;
    bool submodule = false;
    std::optional<std::string> git_line_path;
  };
  std::optional<Pending> cur;
  int old_left = 0;
  int new_left = 0;

  auto flush = [&] {
    if (!cur) return;
    if (cur->submodule) {
      ++diff.submodules_skipped;
    } else if (cur->binary) {
      ++diff.binary_files_skipped;
    } else {
      auto& f = cur->file;
      if (!f.old_path && !cur->added) f.old_path = cur->git_line_path;
      if (!f.new_path && !cur->deleted) f.new_path = cur->git_line_path;
      if (cur->added) f.old_path.reset();
      if (cur->deleted) f.new_path.reset();
      diff.files.push_back(std::move(f));
    }
    cur.reset();
  };

  std::size_t pos = 0;
  while (pos < patch.size()) {
    auto end = patch.find('\n', pos);
    if (end == std::string_view::npos) end = patch.size();
    const std::string_view line = patch.substr(pos, end - pos);
    pos = end + 1;

    if (old_left > 0 || new_left > 0) {
      if (line.empty()) throw Error(Errc::ObjectMissing, "truncated hunk body");
      switch (line.front()) {
        case '-': --old_left; break;
        case '+': --new_left; break;
        case '\\': break;
        default: throw Error(Errc::ObjectMissing, "unexpected hunk line: " + std::string(line));
      }
      continue;
    }
    if (line.empty()) continue;
    if (line.front() == '\\') continue;  // "\ No newline at end of file"

    if (starts_with(line, "diff --git ")) {
      flush();
      cur.emplace();
      // "a/P b/P" with identical halves is the only unambiguous form.
      const auto rest = line.substr(11);
      if (rest.size() % 2 == 1) {
        const auto half = rest.size() / 2;
        const auto left = rest.substr(0, half);
        const auto right = rest.substr(half + 1);
        if (starts_with(left, "a/") && starts_with(right, "b/") && left.substr(2) == right.substr(2)) {
          cur->git_line_path = std::string(left.substr(2));
        }
      }
      continue;
    }
    if (!cur) continue;

    if (starts_with(line, "@@ ")) {
      const auto fields = split(line, ' ');
      if (fields.size() < 4) throw Error(Errc::ObjectMissing, "bad hunk header: " + std::string(line));
      const auto [os, ol] = parse_range(fields[1]);
      const auto [ns, nl] = parse_range(fields[2]);
      cur->file.hunks.push_back(DiffHunk{os, ol, ns, nl});
      old_left = ol;
      new_left = nl;
      if (cur->submodule) old_left = new_left = 0;
    } else if (starts_with(line, "new file mode ")) {
      cur->added = true;
      if (line.substr(14) == "160000") cur->submodule = true;
    } else if (starts_with(line, "deleted file mode ")) {
      cur->deleted = true;
      if (line.substr(18) == "160000") cur->submodule = true;
    } else if (starts_with(line, "index ")) {
      if (line.size() >= 7 && line.substr(line.size() - 7) == " 160000") cur->submodule = true;
    } else if (starts_with(line, "old mode ") || starts_with(line, "new mode ")) {
      if (line.substr(9) == "160000") cur->submodule = true;
    } else if (starts_with(line, "rename from ")) {
      cur->file.old_path = unquote_path(line.substr(12));
    } else if (starts_with(line, "rename to ")) {
      cur->file.new_path = unquote_path(line.substr(10));
    } else if (starts_with(line, "--- ")) {
      cur->file.old_path = patch_side_path(line.substr(4), "a/");
      if (!cur->file.old_path) cur->added = true;
    } else if (starts_with(line, "+++ ")) {
      cur->file.new_path = patch_side_path(line.substr(4), "b/");
      if (!cur->file.new_path) cur->deleted = true;
    } else if (starts_with(line, "Binary files ") || starts_with(line, "GIT binary patch")) {
      cur->binary = true;
    }
  }
  if (old_left > 0 || new_left > 0) throw Error(Errc::ObjectMissing, "patch ends inside a hunk");
  flush();
  return diff;
}

std::vector<BlameSpan> parse_blame_porcelain(std::string_view porcelain) {
  auto lines = parse_blame_lines(porcelain);
  std::sort(lines.begin(), lines.end(),
            [](const BlameLine& a, const BlameLine& b) { return a.final_line < b.final_line; });
  return merge_blame_lines(lines);
}

namespace {

std::vector<std::string> git_args(const RepoSource& src, std::initializer_list<std::string> tail) {
  std::vector<std::string> argv{src.options().git_executable, "-C", src.path().string(),
                                "-c", "core.quotepath=off"};
  argv.insert(argv.end(), tail.begin(), tail.end());
  return argv;
}

ProcessOptions git_env() {
  ProcessOptions opts;
  opts.env = {{"LC_ALL", "C"}, {"GIT_OPTIONAL_LOCKS", "0"}, {"GIT_TERMINAL_PROMPT", "0"},
              {"GIT_PAGER", "cat"}};
  return opts;
}

ProcessResult git(const std::vector<std::string>& argv) { return run_process(argv, git_env()); }

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

}  // namespace

RepoSource::RepoSource(fs::path repo_path, RepoSourceOptions opts)
    : repo_path_(std::move(repo_path)), opts_(std::move(opts)) {
  std::error_code ec;
  if (!fs::is_directory(repo_path_, ec)) {
    throw Error(Errc::RepoNotFound, repo_path_.string() + " is not a directory");
  }
  repo_path_ = fs::canonical(repo_path_);
  const auto r = git(git_args(*this, {"rev-parse", "--absolute-git-dir"}));
  if (r.exit_code != 0) throw Error(Errc::RepoNotFound, repo_path_.string() + ": " + trim(r.err));
  // Refuse to silently analyze an enclosing repository.
  const fs::path git_dir = fs::weakly_canonical(trim(r.out));
  if (git_dir != repo_path_ && git_dir != repo_path_ / ".git") {
    throw Error(Errc::RepoNotFound, repo_path_.string() + " is not the root of a git repository");
  }
}

std::string RepoSource::resolve(const std::string& rev) const {
  const auto r = git(git_args(*this, {"rev-parse", "--verify", "--quiet", "--end-of-options",
                                      rev + "^{commit}"}));
  if (r.exit_code != 0) throw Error(Errc::BranchNotFound, "cannot resolve '" + rev + "'");
  return trim(r.out);
}

std::vector<CommitMeta> RepoSource::list_commits(const RangeOptions& range) const {
  const std::string tip = resolve(range.branch);
  std::vector<std::string> argv = git_args(
      *this, {"log", "--date-order", "--reverse", "--no-color",
              "--format=%H%x1f%P%x1f%ct%x1f%ae%x1f%an%x1e"});
  if (range.first_parent) argv.emplace_back("--first-parent");
  argv.push_back(tip);
  const auto r = git(argv);
  if (r.exit_code != 0) throw Error(Errc::ObjectMissing, "git log failed: " + trim(r.err));

  std::vector<CommitMeta> commits;
  for (auto record : split(r.out, '\x1e')) {
    while (!record.empty() && record.front() == '\n') record.remove_prefix(1);
    if (record.empty()) continue;
    const auto f = split(record, '\x1f');
    if (f.size() != 5) throw Error(Errc::ObjectMissing, "unexpected git log record");
    CommitMeta c;
    c.sha = std::string(f[0]);
    if (!f[1].empty()) {
      for (auto p : split(f[1], ' ')) c.parents.emplace_back(p);
    }
    c.committer_ts = parse_int<Timestamp>(f[2], "committer timestamp");
    c.author_id = normalize_author(f[3], f[4]);
    if (range.since_ts && c.committer_ts < *range.since_ts) continue;
    if (range.until_ts && c.committer_ts > *range.until_ts) continue;
    commits.push_back(std::move(c));
  }
  if (commits.empty()) throw Error(Errc::EmptyHistory, "no commits in the requested range");
  return commits;
}

CommitDiff RepoSource::diff_commit(const CommitMeta& commit, std::size_t parent_index) const {
  std::vector<std::string> argv = git_args(
      *this, {"diff-tree", "-r", "-p", "-U0", "--no-color", "--no-ext-diff", "--no-textconv",
              "--src-prefix=a/", "--dst-prefix=b/", "--no-commit-id",
              "-M" + std::to_string(opts_.rename_similarity) + "%"});
  if (commit.is_root()) {
    argv.emplace_back("--root");
    argv.push_back(commit.sha);
  } else {
    if (parent_index >= commit.parents.size()) {
      throw Error(Errc::DomainError, "commit " + commit.sha + " has no parent #" + std::to_string(parent_index));
    }
    argv.push_back(commit.parents[parent_index]);
    argv.push_back(commit.sha);
  }
  const auto r = git(argv);
  if (r.exit_code != 0) throw Error(Errc::ObjectMissing, "diff of " + commit.sha + ": " + trim(r.err));
  return parse_zero_context_patch(r.out);
}

std::vector<BlameSpan> RepoSource::blame_range(const std::string& commit_sha,
                                               const std::string& file_path, int start, int len,
                                               bool first_parent) const {
  return blame_ranges(commit_sha, file_path, {LineRange{start, len}}, first_parent).front();
}

std::vector<std::vector<BlameSpan>> RepoSource::blame_ranges(const std::string& commit_sha,
                                                             const std::string& file_path,
                                                             const std::vector<LineRange>& ranges,
                                                             bool first_parent) const {
  std::vector<std::vector<BlameSpan>> result(ranges.size());
  if (ranges.empty()) return result;

  std::vector<std::string> argv = git_args(*this, {"blame", "--porcelain"});
  if (first_parent) argv.emplace_back("--first-parent");
  for (const auto& r : ranges) {
    if (r.start < 1 || r.len < 1) {
      throw Error(Errc::RangeOutOfBounds, "invalid blame range " + std::to_string(r.start) + "+" +
                                              std::to_string(r.len));
    }
    argv.emplace_back("-L");
    argv.push_back(std::to_string(r.start) + "," + std::to_string(r.start + r.len - 1));
  }
  argv.push_back(commit_sha);
  argv.emplace_back("--");
  argv.push_back(file_path);

  const auto r = git(argv);
  if (r.exit_code != 0) {
    if (r.err.find("no such path") != std::string::npos) {
      throw Error(Errc::FileNotAtCommit, file_path + " at " + commit_sha);
    }
    if (r.err.find("has only") != std::string::npos) {
      throw Error(Errc::RangeOutOfBounds, file_path + " at " + commit_sha + ": " + trim(r.err));
    }
    throw Error(Errc::ObjectMissing, "blame " + file_path + " at " + commit_sha + ": " + trim(r.err));
  }

  const auto spans = parse_blame_porcelain(r.out);
  // git coalesces adjacent -L ranges, so cut the spans back to the queries.
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const int lo = ranges[i].start;
    const int hi = ranges[i].start + ranges[i].len;  // exclusive
    int covered = 0;
    for (const auto& s : spans) {
      const int s_lo = std::max(lo, s.query_start);
      const int s_hi = std::min(hi, s.query_start + s.span_len);
      if (s_lo >= s_hi) continue;
      const int skip = s_lo - s.query_start;
      result[i].push_back(BlameSpan{s.origin_sha, s.origin_path, s.origin_start + skip, s_hi - s_lo, s_lo});
      covered += s_hi - s_lo;
    }
    if (covered != ranges[i].len) {
      throw Error(Errc::RangeOutOfBounds, "blame of " + file_path + " did not cover the requested range");
    }
  }
  return result;
}

std::string RepoSource::read_file(const std::string& commit_sha, const std::string& file_path) const {
  const auto r = git(git_args(*this, {"cat-file", "blob", commit_sha + ":" + file_path}));
  if (r.exit_code != 0) throw Error(Errc::FileNotAtCommit, file_path + " at " + commit_sha);
  return r.out;
}

}  // namespace ttm
