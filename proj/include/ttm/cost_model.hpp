#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ttm/hunk_index.hpp"

namespace ttm {

struct CostObservation {
  double hunks = 1;       // H
  double developers = 1;  // D
  double commits = 1;     // T
  double measured_seconds = 0;
};

struct CostModelParams {
  double alpha = 0;
  double r_squared = 0;  // against the through-origin model: 1 - SSres / sum(p^2)
  std::size_t n_points = 0;
  std::vector<double> residuals;
};

// Natural log, floored at ln 2 so that a single developer or a single
// commit still costs something.
double log_factor(double x);

// Predicted seconds: alpha * H * log_factor(D) * log_factor(T).
double eval_model(double alpha, double hunks, double developers, double commits);

// Regressor of one observation under the model with alpha = 1.
double design_value(const CostObservation& obs);

// Closed-form least squares through the origin.
CostModelParams fit_alpha(const std::vector<CostObservation>& observations);

struct BenchPoint {
  int commits = 20;
  int developers = 2;
  int files = 4;
  int hunks_per_commit_max = 3;
};

struct BenchRow {
  CostObservation obs;
  BackendKind backend = BackendKind::Memory;
  std::optional<double> predicted_seconds;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<std::pair<BackendKind, std::optional<CostModelParams>>> fits;
  bool backends_agree = true;  // identical TTM records on every grid point
};

std::vector<BenchPoint> bench_grid(std::string_view name);  // "small" | "medium"

// Generates one synthetic repository per grid point under work_dir, runs the
// engine once per backend and fits alpha per backend. Runs are serial.
BenchReport benchmark_suite(const std::vector<BenchPoint>& grid, const std::vector<BackendKind>& backends,
                            const std::filesystem::path& work_dir, std::uint64_t seed = 1);

// CSV with header H,D,T,backend,measured_seconds,predicted_seconds,residual.
std::string bench_report_csv(const BenchReport& report);

}  // namespace ttm
