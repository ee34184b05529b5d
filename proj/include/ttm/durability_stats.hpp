#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ttm/ttm_engine.hpp"

namespace ttm {

enum class TimeUnit { Seconds, Minutes, Hours, Days };

double unit_divisor(TimeUnit unit);
std::string_view to_string(TimeUnit unit);
std::optional<TimeUnit> parse_time_unit(std::string_view name);

struct Grouping {
  enum class Kind { Repo, Author, PathPrefix, IntroWindow };
  Kind kind = Kind::Repo;
  int depth = 1;                    // PathPrefix: number of '/'-separated components
  std::int64_t width_seconds = 0;   // IntroWindow

  static Grouping repo() { return {Kind::Repo, 1, 0}; }
  static Grouping by_author() { return {Kind::Author, 1, 0}; }
  static Grouping by_path_prefix(int depth) { return {Kind::PathPrefix, depth, 0}; }
  static Grouping by_intro_window(std::int64_t width) { return {Kind::IntroWindow, 1, width}; }
};

/// Moments and order statistics over the Measured records of one group.
/// Magnitude fields are expressed in `unit` and are absent when n_measured is 0.
struct DurabilitySummary {
  std::string group_key;  // repo | author:<id> | path-prefix:<p> | window:<start>,<end>
  TimeUnit unit = TimeUnit::Seconds;
  std::size_t n_measured = 0;
  std::optional<double> mttm;
  std::optional<double> median;
  std::optional<double> stddev;  // sample (n-1); 0 for a single value
  std::optional<double> min;
  std::optional<double> max;
  std::optional<double> p25;
  std::optional<double> p75;
  std::optional<double> p90;
  std::size_t n_censored = 0;
  std::size_t n_negative = 0;

  friend bool operator==(const DurabilitySummary&, const DurabilitySummary&) = default;
};

// Linear interpolation between closest ranks at index q*(n-1).
double percentile(std::span<const double> sorted_values, double q);

std::vector<DurabilitySummary> summarize(std::span<const TTMRecord> records, const Grouping& grouping,
                                         TimeUnit unit = TimeUnit::Seconds);

// Buckets by intro_ts into half-open windows [k*w, (k+1)*w); empty windows are omitted.
std::vector<std::pair<Timestamp, DurabilitySummary>> timeseries_mttm(std::span<const TTMRecord> records,
                                                                     std::int64_t window_seconds,
                                                                     TimeUnit unit = TimeUnit::Seconds);

std::string path_prefix(std::string_view path, int depth);

}  // namespace ttm
