// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [path-to-ttm-binary]

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "fixture.hpp"
#include "ttm/cli.hpp"
#include "ttm/cost_model.hpp"
#include "ttm/durability_stats.hpp"
#include "ttm/report.hpp"
#include "ttm/synth_repo.hpp"
#include "ttm/ttm_engine.hpp"

namespace {

using namespace ttm;
using ttm::testing::TempDir;
namespace fs = std::filesystem;

std::string g_cli_binary;

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the real executable when one was given, else the in-process entry point.
CliRun cli(const std::vector<std::string>& args) {
  if (g_cli_binary.empty()) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
  }
  std::vector<std::string> argv{g_cli_binary};
  argv.insert(argv.end(), args.begin(), args.end());
  ProcessOptions opts;
  opts.env = {{"TTM_NO_COLOR", "1"}};
  const auto r = run_process(argv, opts);
  return {r.exit_code, r.out, r.err};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

Verdict oracle_equivalence() {
  int matched = 0, total = 0;
  std::string first_bad;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    std::mt19937_64 rng(seed * 7919);
    SynthSpec spec;
    spec.seed = seed;
    spec.n_commits = 1 + static_cast<int>(rng() % 20);
    spec.files = 1 + static_cast<int>(rng() % 3);
    spec.n_devs = 1 + static_cast<int>(rng() % 5);
    spec.hunks_per_commit = {1, 1 + static_cast<std::int64_t>(rng() % 4)};
    spec.delete_file_fraction = rng() % 5 == 0 ? 0.08 : 0.0;
    TempDir tmp;
    const auto manifest = generate(spec, tmp / "r");
    auto run = process_repository(tmp / "r", RangeOptions{}, BackendOptions{});
    const auto engine = collect_records(*run.index, run.meta.end_of_range_ts);
    ++total;
    if (engine == oracle_ttm(manifest) && run.meta.hunks_registered == manifest.hunks_introduced()) {
      ++matched;
    } else if (first_bad.empty()) {
      first_bad = ", first mismatch at seed " + std::to_string(seed);
    }
  }
  return {matched == total, std::to_string(matched) + "/" + std::to_string(total) + " repos match" + first_bad};
}

const TTMRecord* find_sha(const std::vector<TTMRecord>& recs, const std::string& sha) {
  for (const auto& r : recs) {
    if (r.key.intro_sha == sha) return &r;
  }
  return nullptr;
}

Verdict toy_fixture() {
  TempDir tmp;
  const auto fx = ttm::testing::build_toy_fixture(tmp / "r");
  auto run = process_repository(fx.path, RangeOptions{}, BackendOptions{});
  const auto recs = collect_records(*run.index, run.meta.end_of_range_ts);
  const auto* c1 = find_sha(recs, fx.shas[0]);
  const auto* c2 = find_sha(recs, fx.shas[1]);
  const auto* c3 = find_sha(recs, fx.shas[2]);
  const auto repo = summarize(recs, Grouping::repo());
  const bool ok = recs.size() == 3 && c1 && c2 && c3 && c1->outcome == Outcome::Measured && c1->ttm_seconds == 100 &&
                  c2->outcome == Outcome::Censored && c3->outcome == Outcome::Censored && repo.size() == 1 &&
                  repo[0].mttm && *repo[0].mttm == 100.0;
  return {ok, "C1 ttm=" + (c1 ? std::to_string(c1->ttm_seconds) : "?") + " s, C2/C3 " +
                  (c2 ? std::string(to_string(c2->outcome)) : "?") + "/" +
                  (c3 ? std::string(to_string(c3->outcome)) : "?") + ", repo MTTM " +
                  (repo.empty() || !repo[0].mttm ? "n/a" : fmt(*repo[0].mttm)) + " s"};
}

std::vector<TTMRecord> injected(std::initializer_list<std::int64_t> ttms) {
  std::vector<TTMRecord> out;
  int i = 0;
  for (auto t : ttms) {
    TTMRecord r;
    r.key = {"s" + std::to_string(i++), "f", 1, 1};
    r.outcome = Outcome::Measured;
    r.ttm_seconds = t;
    r.first_mod_sha = "m";
    out.push_back(r);
  }
  return out;
}

Verdict mttm_formula() {
  const auto a = summarize(injected({100, 200, 300, 400}), Grouping::repo())[0];
  const auto b = summarize(injected({1, 3}), Grouping::repo())[0];
  const bool ok = rel_close(*a.mttm, 250, 1e-9) && rel_close(*a.median, 250, 1e-9) && rel_close(*b.mttm, 2, 1e-9) &&
                  rel_close(*b.stddev, std::sqrt(2.0), 1e-9);
  return {ok, "{100..400}: mean " + fmt(*a.mttm) + " median " + fmt(*a.median) + "; {1,3}: mean " + fmt(*b.mttm) +
                  " stddev " + fmt(*b.stddev)};
}

Verdict backend_equivalence() {
  int identical = 0, reopened = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TempDir tmp;
    SynthSpec spec;
    spec.seed = 500 + seed;
    spec.n_commits = 10 + static_cast<int>(seed % 11);
    spec.files = 1 + static_cast<int>(seed % 4);
    spec.n_devs = 1 + static_cast<int>(seed % 5);
    spec.delete_file_fraction = seed % 3 == 0 ? 0.05 : 0.0;
    generate(spec, tmp / "r");
    auto mem = process_repository(tmp / "r", RangeOptions{}, BackendOptions{});
    BackendOptions disk_opts{BackendKind::Disk, tmp / "store", "", 8};
    auto disk = process_repository(tmp / "r", RangeOptions{}, disk_opts);
    const auto mem_csv = records_to_csv(collect_records(*mem.index, mem.meta.end_of_range_ts));
    const auto disk_csv = records_to_csv(collect_records(*disk.index, disk.meta.end_of_range_ts));
    identical += mem_csv == disk_csv;
    const auto before = disk.index->iterate_all();
    disk.index.reset();
    DiskHunkIndex again(tmp / "store", "", 8, false);
    reopened += again.iterate_all() == before;
  }
  return {identical == 20 && reopened == 20, std::to_string(identical) + "/20 byte-identical CSVs, " +
                                                 std::to_string(reopened) + "/20 stores identical after reopen"};
}

Verdict subsequent_modification() {
  TempDir tmp;
  const auto fx = ttm::testing::build_fixture(tmp / "r", {
                                                              {1000, "a@x.org", {{"f.txt", "1\n2\n3\n4\n"}}},
                                                              {1300, "b@x.org", {{"f.txt", "one\n2\n3\n4\n"}}},
                                                              {1900, "c@x.org", {{"f.txt", "one\n2\n3\nfour\n"}}},
                                                          });
  auto run = process_repository(fx.path, RangeOptions{}, BackendOptions{});
  const auto recs = collect_records(*run.index, run.meta.end_of_range_ts);
  const auto* h = find_sha(recs, fx.shas[0]);
  const bool ok = h && h->outcome == Outcome::Measured && h->ttm_seconds == 300 && h->first_mod_sha == fx.shas[1];
  return {ok, "hunk touched at +300 s and +900 s records " + (h ? std::to_string(h->ttm_seconds) : "?") + " s"};
}

Verdict cost_model() {
  const double expected = 200 * std::log(10.0) * std::log(100.0);
  const double v = eval_model(2, 100, 10, 100);

  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> h(1, 50000), d(1, 100), t(1, 10000);
  std::vector<CostObservation> clean, noisy;
  std::uniform_real_distribution<double> eps(-0.01, 0.01);
  for (int i = 0; i < 50; ++i) {
    CostObservation o{double(h(rng)), double(d(rng)), double(t(rng)), 0};
    o.measured_seconds = 3.5 * design_value(o);
    clean.push_back(o);
    o.measured_seconds *= 1 + eps(rng);
    noisy.push_back(o);
  }
  const double a_clean = fit_alpha(clean).alpha;
  const double a_noisy = fit_alpha(noisy).alpha;
  const bool ok = rel_close(v, expected, 1e-6) && rel_close(a_clean, 3.5, 1e-9) && rel_close(a_noisy, 3.5, 0.01);
  return {ok, "eval " + fmt(v) + " (expected " + fmt(expected) + "), noise-free alpha " + fmt(a_clean) +
                  ", 1%-noise alpha " + fmt(a_noisy)};
}

Verdict determinism() {
  TempDir tmp;
  SynthSpec spec;
  spec.seed = 77;
  spec.n_commits = 80;
  spec.files = 8;
  spec.n_devs = 4;
  spec.hunks_per_commit = {1, 6};
  generate(spec, tmp / "repo");
  const auto repo = (tmp / "repo").string();
  std::vector<std::vector<std::string>> runs = {
      {"analyze", repo, "--out", (tmp / "a").string(), "--workers", "1"},
      {"analyze", repo, "--out", (tmp / "b").string(), "--workers", "1"},
      {"analyze", repo, "--out", (tmp / "c").string(), "--workers", "8"},
      {"analyze", repo, "--out", (tmp / "d").string(), "--workers", "8", "--backend", "disk", "--store",
       (tmp / "s").string()},
  };
  for (const auto& args : runs) {
    const auto r = cli(args);
    if (r.code != 0) return {false, "analyze exited " + std::to_string(r.code) + ": " + r.err};
  }
  int same = 0;
  for (const auto* d : {"b", "c", "d"}) {
    bool all = true;
    for (const auto* f : {"hunks.csv", "summary.csv"}) all &= slurp(tmp / "a" / f) == slurp(tmp / d / f);
    same += all;
  }
  const bool run_json_same = slurp(tmp / "a" / "run.json") == slurp(tmp / "b" / "run.json") &&
                             slurp(tmp / "a" / "run.json") == slurp(tmp / "c" / "run.json");
  return {same == 3 && run_json_same, std::to_string(same) + "/3 reruns identical (repeat, workers 8, disk workers 8)"};
}

Verdict performance() {
  TempDir tmp;
  SynthSpec spec;
  spec.seed = 2000;
  spec.n_commits = 2000;
  spec.files = 40;
  spec.n_devs = 8;
  spec.hunks_per_commit = {1, 12};
  spec.max_lines_per_file = 400;
  const auto gen_start = std::chrono::steady_clock::now();
  const auto manifest = generate(spec, tmp / "repo");
  const double gen_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - gen_start).count();

  const auto start = std::chrono::steady_clock::now();
  const auto r = cli({"analyze", (tmp / "repo").string(), "--backend", "mem", "--out", (tmp / "out").string()});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.code != 0) return {false, "analyze exited " + std::to_string(r.code) + ": " + r.err};
  const auto hunks = records_from_csv(slurp(tmp / "out" / "hunks.csv")).size();

  const auto bench = cli({"bench", "--grid", "small", "--backend", "mem", "--out", (tmp / "bench").string()});
  const bool bench_ok = bench.code == 0 && bench.out.find("alpha=") != std::string::npos &&
                        bench.out.find("r2=") != std::string::npos;
  std::string fit_line = bench.out.substr(0, bench.out.find('\n'));
  const bool ok = secs < 300 && hunks >= 9000 && hunks == manifest.hunks_introduced() && bench_ok;
  return {ok, "2000 commits / " + std::to_string(hunks) + " hunks analyzed in " + fmt(secs) + " s (generation " +
                  fmt(gen_s) + " s); bench: " + fit_line};
}

Verdict gate_semantics() {
  TempDir tmp;
  const auto fx = ttm::testing::build_toy_fixture(tmp / "repo");
  const auto dir = (tmp / "r").string();
  if (cli({"analyze", fx.path.string(), "--out", dir}).code != 0) return {false, "analyze failed"};
  const auto pass = cli({"gate", dir, "--min-mttm", "50s", "--min-sample", "1"});
  const auto fail = cli({"gate", dir, "--min-mttm", "200s", "--min-sample", "1"});
  const auto skip = cli({"gate", dir, "--min-mttm", "200s", "--min-sample", "30"});
  const bool warned = skip.err.find("insufficient data") != std::string::npos;
  const bool ok = pass.code == 0 && fail.code == 1 && skip.code == 0 && warned;
  return {ok, "exit codes " + std::to_string(pass.code) + "/" + std::to_string(fail.code) + "/" +
                  std::to_string(skip.code) + (warned ? ", skip warned" : ", no skip warning")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli_binary = argv[1];
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"1 oracle equivalence", oracle_equivalence},
      {"2 toy fixture", toy_fixture},
      {"3 MTTM formula", mttm_formula},
      {"4 backend equivalence", backend_equivalence},
      {"5 subsequent modifications ignored", subsequent_modification},
      {"6 cost model", cost_model},
      {"7 determinism", determinism},
      {"8 desk-scale performance", performance},
      {"9 gate semantics", gate_semantics},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict result;
    try {
      result = check();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !result.pass;
    std::cout << (result.pass ? "PASS " : "FAIL ") << name << ": " << result.detail << " [" << fmt(secs) << " s]"
              << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
