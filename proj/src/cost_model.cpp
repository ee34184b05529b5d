#include "ttm/cost_model.hpp"

#include <cmath>
#include <sstream>

#include "ttm/error.hpp"
#include "ttm/report.hpp"
#include "ttm/synth_repo.hpp"

namespace ttm {
namespace fs = std::filesystem;

double log_factor(double x) {
  if (!(x >= 1.0)) throw Error(Errc::DomainError, "model inputs must be at least 1");
  return std::log(std::max(x, 2.0));
}

double eval_model(double alpha, double hunks, double developers, double commits) {
  if (!(alpha > 0.0)) throw Error(Errc::DomainError, "alpha must be positive");
  if (!(hunks >= 1.0)) throw Error(Errc::DomainError, "H must be at least 1");
  return alpha * hunks * log_factor(developers) * log_factor(commits);
}

double design_value(const CostObservation& obs) {
  if (!(obs.hunks >= 1.0)) throw Error(Errc::DomainError, "H must be at least 1");
  return obs.hunks * log_factor(obs.developers) * log_factor(obs.commits);
}

CostModelParams fit_alpha(const std::vector<CostObservation>& observations) {
  if (observations.size() < 3) {
    throw Error(Errc::InsufficientData, "need at least 3 observations, got " + std::to_string(observations.size()));
  }
  std::vector<double> x;
  x.reserve(observations.size());
  long double sxx = 0, sxp = 0, spp = 0;
  for (const auto& o : observations) {
    x.push_back(design_value(o));
    sxx += static_cast<long double>(x.back()) * x.back();
    sxp += static_cast<long double>(x.back()) * o.measured_seconds;
    spp += static_cast<long double>(o.measured_seconds) * o.measured_seconds;
  }
  if (sxx == 0) throw Error(Errc::DegenerateDesign, "all regressors are zero");

  CostModelParams params;
  params.alpha = static_cast<double>(sxp / sxx);
  params.n_points = observations.size();
  long double ss_res = 0;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const double r = observations[i].measured_seconds - params.alpha * x[i];
    params.residuals.push_back(r);
    ss_res += static_cast<long double>(r) * r;
  }
  params.r_squared = spp > 0 ? static_cast<double>(1.0L - ss_res / spp) : 1.0;
  return params;
}

std::vector<BenchPoint> bench_grid(std::string_view name) {
  if (name == "small") {
    return {{20, 2, 4, 3}, {40, 2, 4, 3}, {40, 4, 6, 3}, {80, 4, 6, 3}};
  }
  if (name == "medium") {
    return {{100, 2, 8, 4}, {200, 4, 8, 4}, {400, 4, 12, 4}, {400, 8, 12, 6}, {800, 8, 16, 6}, {800, 16, 16, 8}};
  }
  throw Error(Errc::DomainError, "unknown benchmark grid '" + std::string(name) + "'");
}

BenchReport benchmark_suite(const std::vector<BenchPoint>& grid, const std::vector<BackendKind>& backends,
                            const fs::path& work_dir, std::uint64_t seed) {
  if (grid.empty()) throw Error(Errc::DomainError, "empty benchmark grid");
  if (backends.empty()) throw Error(Errc::DomainError, "no backend selected");

  BenchReport report;
  std::vector<std::vector<CostObservation>> per_backend(backends.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& point = grid[g];
    SynthSpec spec;
    spec.seed = seed + g;
    spec.n_commits = point.commits;
    spec.n_devs = point.developers;
    spec.files = point.files;
    spec.hunks_per_commit = {1, point.hunks_per_commit_max};
    const auto repo_dir = work_dir / ("repo-" + std::to_string(g));
    std::error_code ec;
    fs::remove_all(repo_dir, ec);
    generate(spec, repo_dir);

    std::optional<std::string> reference_csv;
    for (std::size_t b = 0; b < backends.size(); ++b) {
      BackendOptions opts;
      opts.kind = backends[b];
      if (opts.kind == BackendKind::Disk) opts.store_path = work_dir / ("store-" + std::to_string(g));
      auto run = process_repository(repo_dir, RangeOptions{}, opts);
      const auto csv = records_to_csv(collect_records(*run.index, run.meta.end_of_range_ts));
      if (!reference_csv) reference_csv = csv;
      else if (*reference_csv != csv) report.backends_agree = false;

      CostObservation obs;
      obs.hunks = static_cast<double>(std::max<std::size_t>(1, run.meta.hunks_registered));
      obs.developers = static_cast<double>(std::max<std::size_t>(1, run.meta.distinct_authors));
      obs.commits = static_cast<double>(std::max<std::size_t>(1, run.meta.commits_total_in_range));
      obs.measured_seconds = run.meta.wall_seconds;
      per_backend[b].push_back(obs);
      report.rows.push_back(BenchRow{obs, opts.kind, std::nullopt});
    }
  }

  for (std::size_t b = 0; b < backends.size(); ++b) {
    std::optional<CostModelParams> fit;
    try {
      fit = fit_alpha(per_backend[b]);
    } catch (const Error& e) {
      if (e.code() != Errc::InsufficientData && e.code() != Errc::DegenerateDesign) throw;
    }
    if (fit) {
      for (auto& row : report.rows) {
        if (row.backend == backends[b]) {
          row.predicted_seconds = fit->alpha * design_value(row.obs);
        }
      }
    }
    report.fits.emplace_back(backends[b], std::move(fit));
  }
  return report;
}

std::string bench_report_csv(const BenchReport& report) {
  std::ostringstream os;
  os << "H,D,T,backend,measured_seconds,predicted_seconds,residual\n";
  for (const auto& r : report.rows) {
    os << format_double(r.obs.hunks) << ',' << format_double(r.obs.developers) << ','
       << format_double(r.obs.commits) << ',' << to_string(r.backend) << ','
       << format_double(r.obs.measured_seconds) << ',';
    if (r.predicted_seconds) {
      os << format_double(*r.predicted_seconds) << ','
         << format_double(r.obs.measured_seconds - *r.predicted_seconds);
    } else {
      os << ',';
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace ttm
