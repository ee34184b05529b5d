#include "ttm/durability_stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "ttm/error.hpp"

namespace ttm {

double unit_divisor(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::Seconds: return 1.0;
    case TimeUnit::Minutes: return 60.0;
    case TimeUnit::Hours: return 3600.0;
    case TimeUnit::Days: return 86400.0;
  }
  return 1.0;
}

std::string_view to_string(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::Seconds: return "seconds";
    case TimeUnit::Minutes: return "minutes";
    case TimeUnit::Hours: return "hours";
    case TimeUnit::Days: return "days";
  }
  return "seconds";
}

std::optional<TimeUnit> parse_time_unit(std::string_view name) {
  if (name == "seconds" || name == "s") return TimeUnit::Seconds;
  if (name == "minutes" || name == "m") return TimeUnit::Minutes;
  if (name == "hours" || name == "h") return TimeUnit::Hours;
  if (name == "days" || name == "d") return TimeUnit::Days;
  return std::nullopt;
}

double percentile(std::span<const double> sorted_values, double q) {
  if (sorted_values.empty()) throw Error(Errc::EmptyInput, "percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(Errc::DomainError, "percentile fraction outside [0, 1]");
  const double pos = q * static_cast<double>(sorted_values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted_values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted_values[lo];
  return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

std::string path_prefix(std::string_view path, int depth) {
  std::size_t pos = 0;
  for (int i = 0; i < depth; ++i) {
    const auto slash = path.find('/', pos);
    if (slash == std::string_view::npos) return std::string(path);
    pos = slash + 1;
  }
  return std::string(path.substr(0, pos - 1));
}

namespace {

// Window groups sort numerically by start; everything else by label.
struct GroupId {
  std::int64_t order = 0;
  std::string label;
  bool operator<(const GroupId& o) const { return std::tie(order, label) < std::tie(o.order, o.label); }
};

std::int64_t window_start(Timestamp ts, std::int64_t width) {
  auto k = ts / width;
  if (ts % width != 0 && ts < 0) --k;
  return k * width;
}

DurabilitySummary summarize_group(std::string key, const std::vector<const TTMRecord*>& group, TimeUnit unit) {
  DurabilitySummary s;
  s.group_key = std::move(key);
  s.unit = unit;
  std::vector<double> values;
  for (const auto* r : group) {
    switch (r->outcome) {
      case Outcome::Measured: values.push_back(static_cast<double>(r->ttm_seconds)); break;
      case Outcome::Censored: ++s.n_censored; break;
      case Outcome::NegativeDelta: ++s.n_negative; break;
    }
  }
  s.n_measured = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());

  long double sum = 0;
  for (const double v : values) sum += v;
  const long double mean = sum / static_cast<long double>(values.size());
  long double ss = 0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const double stddev =
      values.size() > 1 ? static_cast<double>(std::sqrt(ss / static_cast<long double>(values.size() - 1))) : 0.0;

  const double d = unit_divisor(unit);
  s.mttm = static_cast<double>(mean) / d;
  s.median = percentile(values, 0.5) / d;
  s.stddev = stddev / d;
  s.min = values.front() / d;
  s.max = values.back() / d;
  s.p25 = percentile(values, 0.25) / d;
  s.p75 = percentile(values, 0.75) / d;
  s.p90 = percentile(values, 0.90) / d;
  return s;
}

}  // namespace

std::vector<DurabilitySummary> summarize(std::span<const TTMRecord> records, const Grouping& grouping,
                                         TimeUnit unit) {
  if (grouping.kind == Grouping::Kind::PathPrefix && grouping.depth < 1) {
    throw Error(Errc::DomainError, "path prefix depth must be at least 1");
  }
  if (grouping.kind == Grouping::Kind::IntroWindow && grouping.width_seconds <= 0) {
    throw Error(Errc::DomainError, "window width must be positive");
  }
  std::map<GroupId, std::vector<const TTMRecord*>> groups;
  for (const auto& r : records) {
    GroupId id;
    switch (grouping.kind) {
      case Grouping::Kind::Repo: id.label = "repo"; break;
      case Grouping::Kind::Author: id.label = "author:" + r.author_id; break;
      case Grouping::Kind::PathPrefix: id.label = "path-prefix:" + path_prefix(r.key.path, grouping.depth); break;
      case Grouping::Kind::IntroWindow: {
        const auto start = window_start(r.intro_ts, grouping.width_seconds);
        id.order = start;
        id.label = "window:" + std::to_string(start) + "," + std::to_string(start + grouping.width_seconds);
        break;
      }
    }
    groups[std::move(id)].push_back(&r);
  }
  std::vector<DurabilitySummary> out;
  out.reserve(groups.size());
  for (auto& [id, members] : groups) out.push_back(summarize_group(id.label, members, unit));
  return out;
}

std::vector<std::pair<Timestamp, DurabilitySummary>> timeseries_mttm(std::span<const TTMRecord> records,
                                                                     std::int64_t window_seconds, TimeUnit unit) {
  if (window_seconds <= 0) throw Error(Errc::DomainError, "window width must be positive");
  std::vector<std::pair<Timestamp, DurabilitySummary>> out;
  for (auto& s : summarize(records, Grouping::by_intro_window(window_seconds), unit)) {
    const auto comma = s.group_key.find(',');
    const Timestamp start = std::stoll(s.group_key.substr(7, comma - 7));
    out.emplace_back(start, std::move(s));
  }
  return out;
}

}  // namespace ttm
