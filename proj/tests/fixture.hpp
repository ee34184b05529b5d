#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ttm/error.hpp"
#include "ttm/process.hpp"

namespace ttm::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "ttm-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const fs::path& path() const { return path_; }
  [[nodiscard]] fs::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  fs::path path_;
};

// One commit of a hand-built history. `files` maps a path to its new
// content, or to nullopt to delete it. Parents are indices of earlier
// commits; by default a commit follows the previous one.
struct FixtureCommit {
  std::int64_t ts = 0;
  std::string email = "dev@example.com";
  std::vector<std::pair<std::string, std::optional<std::string>>> files;
  std::optional<std::vector<int>> parents;
  std::vector<std::pair<std::string, std::string>> renames;  // from, to
  std::string branch = "main";
};

struct Fixture {
  fs::path path;
  std::vector<std::string> shas;
};

inline ProcessResult git_in(const fs::path& dir, std::vector<std::string> args, std::string input = {}) {
  std::vector<std::string> argv{"git", "-C", dir.string()};
  argv.insert(argv.end(), args.begin(), args.end());
  ProcessOptions opts;
  opts.stdin_data = std::move(input);
  opts.env = {{"LC_ALL", "C"}};
  return run_process(argv, opts);
}

// Builds a non-bare repository with pinned timestamps through fast-import.
inline Fixture build_fixture(const fs::path& dir, const std::vector<FixtureCommit>& commits) {
  fs::create_directories(dir);
  if (git_in(dir, {"init", "-q"}).exit_code != 0) throw std::runtime_error("git init failed");
  std::string stream;
  for (std::size_t i = 0; i < commits.size(); ++i) {
    const auto& c = commits[i];
    const std::string ident = "Dev <" + c.email + "> " + std::to_string(c.ts) + " +0000\n";
    stream += "commit refs/heads/" + c.branch + "\nmark :" + std::to_string(i + 1) + "\n";
    stream += "author " + ident + "committer " + ident;
    const std::string msg = "commit " + std::to_string(i) + "\n";
    stream += "data " + std::to_string(msg.size()) + "\n" + msg;
    std::vector<int> parents;
    if (c.parents) parents = *c.parents;
    else if (i > 0) parents = {static_cast<int>(i) - 1};
    for (std::size_t p = 0; p < parents.size(); ++p) {
      stream += (p == 0 ? "from :" : "merge :") + std::to_string(parents[p] + 1) + "\n";
    }
    for (const auto& [from, to] : c.renames) stream += "R " + from + " " + to + "\n";
    for (const auto& [path, content] : c.files) {
      if (!content) {
        stream += "D " + path + "\n";
      } else if (path.rfind("gitlink:", 0) == 0) {
        stream += "M 160000 " + *content + " " + path.substr(8) + "\n";
      } else {
        stream += "M 100644 inline " + path + "\ndata " + std::to_string(content->size()) + "\n" + *content + "\n";
      }
    }
    stream += "\n";
  }
  const auto marks = dir / ".git" / "fixture-marks";
  const auto r = git_in(dir, {"fast-import", "--quiet", "--date-format=raw", "--export-marks=" + marks.string()}, stream);
  if (r.exit_code != 0) throw std::runtime_error("fast-import failed: " + r.err);
  git_in(dir, {"symbolic-ref", "HEAD", "refs/heads/main"});

  Fixture f{dir, std::vector<std::string>(commits.size())};
  std::ifstream in(marks);
  std::string mark, sha;
  while (in >> mark >> sha) f.shas[static_cast<std::size_t>(std::stoi(mark.substr(1)) - 1)] = sha;
  return f;
}

// Toy history used across suites: C1 adds three lines, C2 replaces line 2,
// C3 replaces line 3.
inline Fixture build_toy_fixture(const fs::path& dir) {
  return build_fixture(dir, {
                                {0, "a@x.org", {{"a.txt", "one\ntwo\nthree\n"}}},
                                {100, "b@x.org", {{"a.txt", "one\nTWO\nthree\n"}}},
                                {250, "a@x.org", {{"a.txt", "one\nTWO\nTHREE\n"}}},
                            });
}

}  // namespace ttm::testing
