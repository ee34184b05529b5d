#include "ttm/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttm/cost_model.hpp"
#include "ttm/durability_stats.hpp"
#include "ttm/error.hpp"
#include "ttm/report.hpp"
#include "ttm/synth_repo.hpp"
#include "ttm/ttm_engine.hpp"

namespace ttm {
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Style {
  bool on = false;
  [[nodiscard]] std::string bold(std::string_view s) const { return on ? "\033[1m" + std::string(s) + "\033[0m" : std::string(s); }
  [[nodiscard]] std::string red(std::string_view s) const { return on ? "\033[31m" + std::string(s) + "\033[0m" : std::string(s); }
  [[nodiscard]] std::string green(std::string_view s) const { return on ? "\033[32m" + std::string(s) + "\033[0m" : std::string(s); }
};

struct AnalysisFlags {
  std::string branch = "HEAD";
  std::optional<std::int64_t> since;
  std::optional<std::int64_t> until;
  bool first_parent = false;
  bool all_commits = false;
  std::string backend = "mem";
  std::string store;
  std::size_t workers = 1;
};

void add_analysis_flags(CLI::App* cmd, AnalysisFlags& f) {
  cmd->add_option("--branch", f.branch, "Branch or revision to analyze")->capture_default_str();
  cmd->add_option("--since", f.since, "Only commits with committer time >= this epoch second");
  cmd->add_option("--until", f.until, "Only commits with committer time <= this epoch second");
  auto* fp = cmd->add_flag("--first-parent", f.first_parent, "Walk the first-parent chain (default)");
  auto* all = cmd->add_flag("--all-commits", f.all_commits, "Walk every commit reachable from the branch");
  fp->excludes(all);
  cmd->add_option("--backend", f.backend, "Hunk index backend")
      ->check(CLI::IsMember({"mem", "disk"}))
      ->capture_default_str();
  cmd->add_option("--store", f.store, "Store directory for the disk backend");
  cmd->add_option("--workers", f.workers, "Concurrent blame queries per commit (0 = all cores)")
      ->capture_default_str();
}

struct Analysis {
  std::vector<TTMRecord> records;
  RunMetadata meta;
};

Analysis run_analysis(const fs::path& repo, const AnalysisFlags& f) {
  RangeOptions range;
  range.branch = f.branch;
  range.since_ts = f.since;
  range.until_ts = f.until;
  range.first_parent = !f.all_commits;

  BackendOptions backend;
  backend.kind = *parse_backend_kind(f.backend);
  if (backend.kind == BackendKind::Disk) {
    if (f.store.empty()) throw UsageError("--backend disk requires --store PATH");
    backend.store_path = f.store;
  }
  EngineOptions engine;
  engine.workers = f.workers;

  auto run = process_repository(repo, range, backend, engine);
  Analysis a;
  a.records = collect_records(*run.index, run.meta.end_of_range_ts);
  a.meta = run.meta;
  return a;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::ParseError, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Accepts an analysis directory or a hunks.csv / hunks.json file.
std::optional<std::vector<TTMRecord>> load_records(const fs::path& input) {
  fs::path file = input;
  if (fs::is_directory(input)) {
    if (fs::exists(input / "hunks.csv")) file = input / "hunks.csv";
    else if (fs::exists(input / "hunks.json")) file = input / "hunks.json";
    else return std::nullopt;
  } else if (!fs::is_regular_file(input)) {
    return std::nullopt;
  }
  const auto text = read_text(file);
  return file.extension() == ".json" ? records_from_json(text) : records_from_csv(text);
}

TimeUnit unit_or_throw(const std::string& name) {
  const auto u = parse_time_unit(name);
  if (!u) throw UsageError("unknown unit '" + name + "'");
  return *u;
}

std::string fmt_value(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream os;
  os << std::setprecision(6) << *v;
  return os.str();
}

std::vector<DurabilitySummary> standard_summaries(const std::vector<TTMRecord>& records, TimeUnit unit) {
  auto out = summarize(records, Grouping::repo(), unit);
  if (out.empty()) {
    DurabilitySummary empty;
    empty.group_key = "repo";
    empty.unit = unit;
    out.push_back(empty);
  }
  for (auto& s : summarize(records, Grouping::by_author(), unit)) out.push_back(std::move(s));
  for (auto& s : summarize(records, Grouping::by_path_prefix(1), unit)) out.push_back(std::move(s));
  return out;
}

// Writes every file or none: on failure the ones already written are removed.
void write_outputs(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::StoreUnwritable, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> written;
  try {
    for (const auto& [name, content] : files) {
      const auto target = dir / name;
      const auto tmp = dir / (name + ".tmp");
      {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out.flush()) throw Error(Errc::StoreUnwritable, "cannot write " + tmp.string());
      }
      fs::rename(tmp, target);
      written.push_back(target);
    }
  } catch (...) {
    for (const auto& p : written) fs::remove(p, ec);
    for (const auto& [name, content] : files) fs::remove(dir / (name + ".tmp"), ec);
    throw;
  }
}

std::string run_json(const RunMetadata& m) {
  // Wall time is left out so that repeated runs produce identical files.
  nlohmann::json j{{"commits_processed", m.commits_processed},
                   {"commits_total_in_range", m.commits_total_in_range},
                   {"hunks_registered", m.hunks_registered},
                   {"distinct_authors", m.distinct_authors},
                   {"binary_files_skipped", m.binary_files_skipped},
                   {"submodules_skipped", m.submodules_skipped},
                   {"unattributed_lines", m.unattributed_lines},
                   {"end_of_range_ts", m.end_of_range_ts},
                   {"backend", to_string(m.backend_kind)}};
  return j.dump(1) + "\n";
}

void print_run_summary(std::ostream& out, const Style& st, const fs::path& repo, const Analysis& a,
                       const DurabilitySummary& repo_summary) {
  const auto& m = a.meta;
  const std::string unit(to_string(repo_summary.unit));
  out << st.bold("repository ") << repo.string() << '\n'
      << st.bold("commits    ") << m.commits_processed << " processed, " << m.distinct_authors << " authors\n"
      << st.bold("hunks      ") << m.hunks_registered << " registered: " << repo_summary.n_measured << " measured, "
      << repo_summary.n_censored << " censored, " << repo_summary.n_negative << " negative\n"
      << st.bold("MTTM       ") << fmt_value(repo_summary.mttm) << ' ' << unit << "  (median "
      << fmt_value(repo_summary.median) << ", stddev " << fmt_value(repo_summary.stddev) << ")\n"
      << st.bold("skipped    ") << m.unattributed_lines << " unattributed lines, " << m.binary_files_skipped
      << " binary files, " << m.submodules_skipped << " submodules\n"
      << st.bold("wall time  ") << std::fixed << std::setprecision(2) << m.wall_seconds << " s ("
      << to_string(m.backend_kind) << " backend)\n";
  out << std::defaultfloat;
}

int cmd_analyze(const fs::path& repo, const AnalysisFlags& flags, const fs::path& out_dir, const std::string& format,
                const std::string& unit_name, std::ostream& out, const Style& st) {
  const auto unit = unit_or_throw(unit_name);
  const auto a = run_analysis(repo, flags);
  const auto summaries = standard_summaries(a.records, unit);
  const bool json = format == "json";
  write_outputs(out_dir, {{json ? "hunks.json" : "hunks.csv", json ? records_to_json(a.records) : records_to_csv(a.records)},
                          {json ? "summary.json" : "summary.csv",
                           json ? summaries_to_json(summaries) : summaries_to_csv(summaries)},
                          {"run.json", run_json(a.meta)}});
  print_run_summary(out, st, repo, a, summaries.front());
  return kExitOk;
}

Grouping::Kind scope_kind(const std::string& name) {
  if (name == "repo") return Grouping::Kind::Repo;
  if (name == "author") return Grouping::Kind::Author;
  if (name == "path-prefix") return Grouping::Kind::PathPrefix;
  throw UsageError("unknown scope '" + name + "'");
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::DomainError: return kExitUsage;
    default: return kExitRepoError;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Style st{&out == &std::cout && ::isatty(STDOUT_FILENO) && std::getenv("TTM_NO_COLOR") == nullptr};

  CLI::App app{"Time-to-modification analysis of git histories", "ttm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ttm 1.0.0");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Compute per-hunk TTM records and MTTM summaries");
  std::string an_repo, an_out, an_format = "csv", an_unit = "days";
  AnalysisFlags an_flags;
  analyze->add_option("repo", an_repo, "Path to the git repository")->required();
  add_analysis_flags(analyze, an_flags);
  analyze->add_option("--out", an_out, "Output directory")->required();
  analyze->add_option("--format", an_format, "Export format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  analyze->add_option("--unit", an_unit, "Unit for summaries")->capture_default_str();

  // stats
  auto* stats = app.add_subcommand("stats", "Summarize an existing analysis");
  std::string st_input, st_group = "repo", st_unit = "days", st_format = "csv", st_out;
  int st_depth = 1;
  std::int64_t st_window = 0;
  stats->add_option("input", st_input, "Analysis directory or hunks file")->required();
  stats->add_option("--group", st_group, "repo | author | path-prefix | window")
      ->check(CLI::IsMember({"repo", "author", "path-prefix", "window"}))
      ->capture_default_str();
  stats->add_option("--depth", st_depth, "Path components for path-prefix grouping")->capture_default_str();
  stats->add_option("--window", st_window, "Window width in seconds for window grouping");
  stats->add_option("--unit", st_unit, "Output unit")->capture_default_str();
  stats->add_option("--format", st_format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  stats->add_option("--out", st_out, "Write to this file instead of stdout");

  // gate
  auto* gate = app.add_subcommand("gate", "Fail when MTTM drops below a threshold");
  std::string g_input, g_min, g_scope = "repo", g_unit = "days";
  std::size_t g_min_sample = 30;
  int g_depth = 1;
  AnalysisFlags g_flags;
  gate->add_option("input", g_input, "Analysis directory, hunks file, or repository")->required();
  gate->add_option("--min-mttm", g_min, "Threshold, e.g. 3600, 90s, 15m, 3h, 2d")->required();
  gate->add_option("--unit", g_unit, "Unit of a bare --min-mttm number")->capture_default_str();
  gate->add_option("--scope", g_scope, "repo | author | path-prefix")
      ->check(CLI::IsMember({"repo", "author", "path-prefix"}))
      ->capture_default_str();
  gate->add_option("--depth", g_depth, "Path components for path-prefix scope")->capture_default_str();
  gate->add_option("--min-sample", g_min_sample, "Groups with fewer measured hunks are skipped")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_analysis_flags(gate, g_flags);

  // bench
  auto* bench = app.add_subcommand("bench", "Fit the processing-cost model on synthetic repositories");
  std::string b_grid = "small", b_backends = "mem,disk", b_out;
  std::uint64_t b_seed = 1;
  bench->add_option("--grid", b_grid, "small | medium")->capture_default_str();
  bench->add_option("--backend", b_backends, "Comma-separated backends")->capture_default_str();
  bench->add_option("--out", b_out, "Output directory")->required();
  bench->add_option("--seed", b_seed, "Base seed")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic repository and its edit manifest");
  SynthSpec spec;
  std::string sy_out;
  synth->add_option("--out", sy_out, "Directory for the generated bare repository")->required();
  synth->add_option("--seed", spec.seed)->capture_default_str();
  synth->add_option("--commits", spec.n_commits)->capture_default_str();
  synth->add_option("--devs", spec.n_devs)->capture_default_str();
  synth->add_option("--files", spec.files)->capture_default_str();
  synth->add_option("--add", spec.edit_mix.add, "Fraction of line insertions")->capture_default_str();
  synth->add_option("--replace", spec.edit_mix.replace, "Fraction of replacements")->capture_default_str();
  synth->add_option("--delete", spec.edit_mix.del, "Fraction of deletions")->capture_default_str();
  synth->add_option("--delete-file", spec.delete_file_fraction, "Chance an edit removes a whole file")
      ->capture_default_str();
  synth->add_option("--min-lines", spec.lines_per_hunk.lo)->capture_default_str();
  synth->add_option("--max-lines", spec.lines_per_hunk.hi)->capture_default_str();
  synth->add_option("--min-gap", spec.inter_commit_seconds.lo, "Seconds between commits, lower bound")
      ->capture_default_str();
  synth->add_option("--max-gap", spec.inter_commit_seconds.hi)->capture_default_str();
  synth->add_option("--max-hunks", spec.hunks_per_commit.hi, "Edits per commit, upper bound")->capture_default_str();
  synth->add_option("--max-file-lines", spec.max_lines_per_file)->capture_default_str();
  synth->add_option("--start-ts", spec.start_ts)->capture_default_str();
  synth->add_option("--warmup", spec.warmup_commits, "Leading commits that only add lines")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (analyze->parsed()) {
      return cmd_analyze(an_repo, an_flags, an_out, an_format, an_unit, out, st);
    }

    if (stats->parsed()) {
      const auto unit = unit_or_throw(st_unit);
      const auto records = load_records(st_input);
      if (!records) throw Error(Errc::ParseError, "no analysis found at " + st_input);
      Grouping grouping = Grouping::repo();
      if (st_group == "author") grouping = Grouping::by_author();
      if (st_group == "path-prefix") grouping = Grouping::by_path_prefix(st_depth);
      if (st_group == "window") {
        if (st_window <= 0) throw UsageError("--group window requires --window SECONDS > 0");
        grouping = Grouping::by_intro_window(st_window);
      }
      const auto summaries = summarize(*records, grouping, unit);
      const auto text = st_format == "json" ? summaries_to_json(summaries) : summaries_to_csv(summaries);
      if (st_out.empty()) out << text;
      else write_outputs(fs::path(st_out).parent_path().empty() ? "." : fs::path(st_out).parent_path(),
                         {{fs::path(st_out).filename().string(), text}});
      return kExitOk;
    }

    if (gate->parsed()) {
      GateConfig cfg;
      cfg.min_mttm_seconds = parse_duration_seconds(g_min, unit_or_throw(g_unit));
      if (!(cfg.min_mttm_seconds > 0)) throw UsageError("--min-mttm must be positive");
      cfg.scope = scope_kind(g_scope);
      cfg.path_depth = g_depth;
      cfg.min_sample = g_min_sample;
      auto records = load_records(g_input);
      if (!records) records = run_analysis(g_input, g_flags).records;
      const auto verdict = evaluate_gate(*records, cfg);
      for (const auto& s : verdict.insufficient) {
        err << "warning: " << s.group_key << ": insufficient data (" << s.n_measured << " measured < "
            << cfg.min_sample << "), skipped\n";
      }
      for (const auto& s : verdict.checked) {
        const bool bad = *s.mttm < cfg.min_mttm_seconds;
        out << (bad ? st.red("FAIL") : st.green("ok  ")) << ' ' << s.group_key << " MTTM " << fmt_value(s.mttm)
            << " s (n=" << s.n_measured << ", threshold " << format_double(cfg.min_mttm_seconds) << " s)\n";
      }
      out << (verdict.pass ? st.green("gate passed") : st.red("gate failed")) << " (" << verdict.checked.size()
          << " checked, " << verdict.violations.size() << " violating, " << verdict.insufficient.size()
          << " skipped)\n";
      return verdict.pass ? kExitOk : kExitGateViolation;
    }

    if (bench->parsed()) {
      std::vector<BackendKind> kinds;
      std::stringstream ss(b_backends);
      for (std::string name; std::getline(ss, name, ',');) {
        const auto k = parse_backend_kind(name);
        if (!k) throw UsageError("unknown backend '" + name + "'");
        kinds.push_back(*k);
      }
      const auto grid = bench_grid(b_grid);
      const fs::path out_dir = b_out;
      const auto report = benchmark_suite(grid, kinds, out_dir / "work", b_seed);
      write_outputs(out_dir, {{"bench.csv", bench_report_csv(report)}});
      for (const auto& [kind, fit] : report.fits) {
        out << st.bold(std::string(to_string(kind))) << ": ";
        if (fit) {
          out << "alpha=" << format_double(fit->alpha) << " r2=" << format_double(fit->r_squared)
              << " n_points=" << fit->n_points << '\n';
        } else {
          out << "not enough points to fit alpha\n";
        }
      }
      out << "backends agree: " << (report.backends_agree ? "yes" : "NO") << '\n';
      return kExitOk;
    }

    if (synth->parsed()) {
      const auto manifest = generate(spec, sy_out);
      out << "generated " << spec.n_commits << " commits, " << manifest.hunks_introduced() << " hunks in " << sy_out
          << "\nmanifest " << (fs::path(sy_out) / "manifest.jsonl").string() << '\n';
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRepoError;
  }
  return kExitUsage;
}

}  // namespace ttm
