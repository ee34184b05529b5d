#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "test_support.hpp"
#include "ttm/cost_model.hpp"

namespace ttm {
namespace {

using testing::error_code_of;
using testing::TempDir;

constexpr double kE = std::numbers::e;

TEST(EvalModel, Examples) {
  const double expected = 2120.7592441913594;  // 200 * ln 10 * ln 100
  EXPECT_NEAR(eval_model(2, 100, 10, 100), expected, 1e-6 * expected);
  EXPECT_NEAR(eval_model(1, 1, kE, kE), 1.0, 1e-12);
  EXPECT_NEAR(eval_model(1, 5, 1, 1), 2.402265069591007, 1e-12);
}

TEST(EvalModel, Errors) {
  EXPECT_EQ(error_code_of([] { (void)eval_model(0, 1, 1, 1); }), Errc::DomainError);
  EXPECT_EQ(error_code_of([] { (void)eval_model(-1, 1, 1, 1); }), Errc::DomainError);
  EXPECT_EQ(error_code_of([] { (void)eval_model(1, 0.5, 1, 1); }), Errc::DomainError);
  EXPECT_EQ(error_code_of([] { (void)eval_model(1, 1, 0, 1); }), Errc::DomainError);
}

TEST(EvalModel, MonotoneInEachInput) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1, 1000);
  for (int i = 0; i < 200; ++i) {
    const double h = u(rng), d = u(rng), t = u(rng);
    const double base = eval_model(1.5, h, d, t);
    EXPECT_LT(base, eval_model(1.5, h * 2, d, t));
    EXPECT_LE(base, eval_model(1.5, h, d + 1, t));
    EXPECT_LE(base, eval_model(1.5, h, d, t + 1));
  }
  // The floor makes one developer cost the same as two.
  EXPECT_DOUBLE_EQ(log_factor(1), log_factor(2));
}

TEST(FitAlpha, ExactProportionality) {
  std::vector<CostObservation> obs{{1, kE, kE, 2}, {2, kE, kE, 4}, {3, kE, kE, 6}};
  const auto p = fit_alpha(obs);
  EXPECT_NEAR(p.alpha, 2, 1e-12);
  EXPECT_NEAR(p.r_squared, 1, 1e-12);
  EXPECT_EQ(p.n_points, 3u);
  for (double r : p.residuals) EXPECT_NEAR(r, 0, 1e-12);
}

TEST(FitAlpha, Errors) {
  std::vector<CostObservation> two{{1, 2, 2, 1}, {2, 2, 2, 2}};
  EXPECT_EQ(error_code_of([&] { (void)fit_alpha(two); }), Errc::InsufficientData);
  EXPECT_EQ(error_code_of([&] { (void)fit_alpha({}); }), Errc::InsufficientData);
}

std::vector<CostObservation> generated(std::uint64_t seed, int n, double alpha, double noise) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> h(1, 20000), d(1, 64), t(1, 5000);
  std::uniform_real_distribution<double> eps(-noise, noise);
  std::vector<CostObservation> out;
  for (int i = 0; i < n; ++i) {
    CostObservation o{double(h(rng)), double(d(rng)), double(t(rng)), 0};
    o.measured_seconds = alpha * design_value(o) * (1 + eps(rng));
    out.push_back(o);
  }
  return out;
}

TEST(FitAlpha, NoiseFreeRecovery) {
  for (double alpha : {1e-6, 0.37, 3.5, 1234.0}) {
    const auto p = fit_alpha(generated(11, 40, alpha, 0));
    EXPECT_NEAR(p.alpha, alpha, 1e-9 * alpha);
    EXPECT_NEAR(p.r_squared, 1, 1e-9);
  }
}

TEST(FitAlpha, OnePercentNoiseStaysWithinBounds) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto p = fit_alpha(generated(seed, 50, 3.5, 0.01));
    EXPECT_GE(p.alpha, 3.465);
    EXPECT_LE(p.alpha, 3.535);
    EXPECT_EQ(p.n_points, 50u);
    EXPECT_GT(p.r_squared, 0.99);
  }
}

TEST(FitAlpha, IsTheLeastSquaresMinimum) {
  const auto obs = generated(8, 30, 2.0, 0.2);
  const auto p = fit_alpha(obs);
  auto ss = [&](double a) {
    double s = 0;
    for (const auto& o : obs) s += std::pow(o.measured_seconds - a * design_value(o), 2);
    return s;
  };
  double ss_fit = 0;
  for (double r : p.residuals) ss_fit += r * r;
  EXPECT_NEAR(ss_fit, ss(p.alpha), 1e-9 * ss_fit);
  EXPECT_LT(ss(p.alpha), ss(p.alpha * 1.01));
  EXPECT_LT(ss(p.alpha), ss(p.alpha * 0.99));
}

TEST(BenchGrid, KnownGrids) {
  EXPECT_EQ(bench_grid("small").size(), 4u);
  EXPECT_EQ(bench_grid("medium").size(), 6u);
  EXPECT_EQ(error_code_of([] { (void)bench_grid("huge"); }), Errc::DomainError);
}

TEST(BenchmarkSuite, OnePointGivesOneObservationPerBackend) {
  TempDir tmp;
  const auto report =
      benchmark_suite({{6, 2, 2, 2}}, {BackendKind::Memory, BackendKind::Disk}, tmp.path(), 4);
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_EQ(report.rows[0].backend, BackendKind::Memory);
  EXPECT_EQ(report.rows[1].backend, BackendKind::Disk);
  EXPECT_EQ(report.rows[0].obs.commits, 6);
  EXPECT_EQ(report.rows[0].obs.hunks, report.rows[1].obs.hunks);
  EXPECT_TRUE(report.backends_agree);
  ASSERT_EQ(report.fits.size(), 2u);
  EXPECT_FALSE(report.fits[0].second.has_value());
}

TEST(BenchmarkSuite, CsvShape) {
  TempDir tmp;
  const auto grid = std::vector<BenchPoint>{{4, 1, 1, 1}, {6, 2, 2, 2}, {8, 2, 2, 2}};
  const auto report = benchmark_suite(grid, {BackendKind::Memory}, tmp.path(), 2);
  ASSERT_TRUE(report.fits[0].second.has_value());
  EXPECT_EQ(report.fits[0].second->n_points, 3u);
  std::istringstream csv(bench_report_csv(report));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "H,D,T,backend,measured_seconds,predicted_seconds,residual");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
    EXPECT_NE(line.find(",mem,"), std::string::npos);
  }
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(error_code_of([&] { (void)benchmark_suite({}, {BackendKind::Memory}, tmp.path()); }), Errc::DomainError);
}

}  // namespace
}  // namespace ttm
