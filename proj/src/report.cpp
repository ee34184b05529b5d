#include "ttm/report.hpp"

#include <charconv>
#include <cmath>

#include <json.hpp>

#include "ttm/error.hpp"

namespace ttm {
using nlohmann::json;

namespace {

constexpr std::string_view kRecordHeader =
    "intro_sha,path,new_start,new_end,author,intro_ts,outcome,ttm_seconds,first_mod_sha";
constexpr std::string_view kSummaryHeader =
    "group_key,unit,n_measured,mttm,median,stddev,min,max,p25,p75,p90,n_censored,n_negative";

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// RFC 4180 reader; quoted fields may span lines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"': quoted = true; any = true; break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r': break;
      case '\n':
        if (any || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        any = false;
        break;
      default: field.push_back(c); any = true;
    }
  }
  if (quoted) throw Error(Errc::ParseError, "unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
T to_number(const std::string& s, std::string_view column) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw Error(Errc::ParseError, "bad value '" + s + "' in column " + std::string(column));
  }
  return v;
}

std::vector<std::vector<std::string>> rows_after_header(std::string_view text, std::string_view header,
                                                        std::size_t columns) {
  auto rows = parse_csv(text);
  if (rows.empty()) throw Error(Errc::ParseError, "empty CSV");
  std::string got;
  for (std::size_t i = 0; i < rows.front().size(); ++i) got += (i ? "," : "") + rows.front()[i];
  if (got != header) throw Error(Errc::ParseError, "unexpected CSV header: " + got);
  rows.erase(rows.begin());
  for (const auto& r : rows) {
    if (r.size() != columns) throw Error(Errc::ParseError, "wrong column count in CSV row");
  }
  return rows;
}

std::string opt_double(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::optional<double> parse_opt_double(const std::string& s, std::string_view column) {
  if (s.empty()) return std::nullopt;
  return to_number<double>(s, column);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string records_to_csv(const std::vector<TTMRecord>& records) {
  std::string out(kRecordHeader);
  out.push_back('\n');
  for (const auto& r : records) {
    const bool modified = r.outcome != Outcome::Censored;
    out += csv_field(r.key.intro_sha) + ',' + csv_field(r.key.path) + ',' + std::to_string(r.key.new_start) + ',' +
           std::to_string(r.key.new_end) + ',' + csv_field(r.author_id) + ',' + std::to_string(r.intro_ts) + ',' +
           std::string(to_string(r.outcome)) + ',' + (modified ? std::to_string(r.ttm_seconds) : "") + ',' +
           (modified ? csv_field(r.first_mod_sha) : "") + '\n';
  }
  return out;
}

std::vector<TTMRecord> records_from_csv(std::string_view text) {
  std::vector<TTMRecord> out;
  for (auto& row : rows_after_header(text, kRecordHeader, 9)) {
    TTMRecord r;
    r.key.intro_sha = std::move(row[0]);
    r.key.path = std::move(row[1]);
    r.key.new_start = to_number<int>(row[2], "new_start");
    r.key.new_end = to_number<int>(row[3], "new_end");
    r.author_id = std::move(row[4]);
    r.intro_ts = to_number<Timestamp>(row[5], "intro_ts");
    const auto outcome = parse_outcome(row[6]);
    if (!outcome) throw Error(Errc::ParseError, "unknown outcome '" + row[6] + "'");
    r.outcome = *outcome;
    if (r.outcome != Outcome::Censored) {
      r.ttm_seconds = to_number<std::int64_t>(row[7], "ttm_seconds");
      r.first_mod_sha = std::move(row[8]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string records_to_json(const std::vector<TTMRecord>& records) {
  json arr = json::array();
  for (const auto& r : records) {
    json j{{"intro_sha", r.key.intro_sha}, {"path", r.key.path},      {"new_start", r.key.new_start},
           {"new_end", r.key.new_end},     {"author", r.author_id},   {"intro_ts", r.intro_ts},
           {"outcome", to_string(r.outcome)}};
    if (r.outcome != Outcome::Censored) {
      j["ttm_seconds"] = r.ttm_seconds;
      j["first_mod_sha"] = r.first_mod_sha;
    } else {
      j["ttm_seconds"] = nullptr;
      j["first_mod_sha"] = nullptr;
    }
    arr.push_back(std::move(j));
  }
  return arr.dump(1) + "\n";
}

std::vector<TTMRecord> records_from_json(std::string_view text) {
  std::vector<TTMRecord> out;
  try {
    for (const auto& j : json::parse(text)) {
      TTMRecord r;
      r.key.intro_sha = j.at("intro_sha").get<std::string>();
      r.key.path = j.at("path").get<std::string>();
      r.key.new_start = j.at("new_start").get<int>();
      r.key.new_end = j.at("new_end").get<int>();
      r.author_id = j.at("author").get<std::string>();
      r.intro_ts = j.at("intro_ts").get<Timestamp>();
      const auto outcome = parse_outcome(j.at("outcome").get<std::string>());
      if (!outcome) throw Error(Errc::ParseError, "unknown outcome");
      r.outcome = *outcome;
      if (r.outcome != Outcome::Censored) {
        r.ttm_seconds = j.at("ttm_seconds").get<std::int64_t>();
        r.first_mod_sha = j.at("first_mod_sha").get<std::string>();
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
  return out;
}

std::string summaries_to_csv(const std::vector<DurabilitySummary>& summaries) {
  std::string out(kSummaryHeader);
  out.push_back('\n');
  for (const auto& s : summaries) {
    out += csv_field(s.group_key) + ',' + std::string(to_string(s.unit)) + ',' + std::to_string(s.n_measured) + ',' +
           opt_double(s.mttm) + ',' + opt_double(s.median) + ',' + opt_double(s.stddev) + ',' + opt_double(s.min) +
           ',' + opt_double(s.max) + ',' + opt_double(s.p25) + ',' + opt_double(s.p75) + ',' + opt_double(s.p90) +
           ',' + std::to_string(s.n_censored) + ',' + std::to_string(s.n_negative) + '\n';
  }
  return out;
}

std::vector<DurabilitySummary> summaries_from_csv(std::string_view text) {
  std::vector<DurabilitySummary> out;
  for (auto& row : rows_after_header(text, kSummaryHeader, 13)) {
    DurabilitySummary s;
    s.group_key = std::move(row[0]);
    const auto unit = parse_time_unit(row[1]);
    if (!unit) throw Error(Errc::ParseError, "unknown unit '" + row[1] + "'");
    s.unit = *unit;
    s.n_measured = to_number<std::size_t>(row[2], "n_measured");
    s.mttm = parse_opt_double(row[3], "mttm");
    s.median = parse_opt_double(row[4], "median");
    s.stddev = parse_opt_double(row[5], "stddev");
    s.min = parse_opt_double(row[6], "min");
    s.max = parse_opt_double(row[7], "max");
    s.p25 = parse_opt_double(row[8], "p25");
    s.p75 = parse_opt_double(row[9], "p75");
    s.p90 = parse_opt_double(row[10], "p90");
    s.n_censored = to_number<std::size_t>(row[11], "n_censored");
    s.n_negative = to_number<std::size_t>(row[12], "n_negative");
    out.push_back(std::move(s));
  }
  return out;
}

std::string summaries_to_json(const std::vector<DurabilitySummary>& summaries) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json arr = json::array();
  for (const auto& s : summaries) {
    arr.push_back(json{{"group_key", s.group_key}, {"unit", to_string(s.unit)}, {"n_measured", s.n_measured},
                       {"mttm", opt(s.mttm)},      {"median", opt(s.median)},   {"stddev", opt(s.stddev)},
                       {"min", opt(s.min)},        {"max", opt(s.max)},         {"p25", opt(s.p25)},
                       {"p75", opt(s.p75)},        {"p90", opt(s.p90)},         {"n_censored", s.n_censored},
                       {"n_negative", s.n_negative}});
  }
  return arr.dump(1) + "\n";
}

GateVerdict evaluate_gate(const std::vector<TTMRecord>& records, const GateConfig& config) {
  if (!(config.min_mttm_seconds > 0)) throw Error(Errc::DomainError, "gate threshold must be positive");
  if (config.min_sample < 1) throw Error(Errc::DomainError, "gate min_sample must be at least 1");
  Grouping grouping;
  switch (config.scope) {
    case Grouping::Kind::Author: grouping = Grouping::by_author(); break;
    case Grouping::Kind::PathPrefix: grouping = Grouping::by_path_prefix(config.path_depth); break;
    default: grouping = Grouping::repo();
  }
  GateVerdict v;
  for (auto& s : summarize(records, grouping, TimeUnit::Seconds)) {
    if (s.n_measured < config.min_sample) {
      v.insufficient.push_back(std::move(s));
      continue;
    }
    if (*s.mttm < config.min_mttm_seconds) {
      v.pass = false;
      v.violations.push_back(s);
    }
    v.checked.push_back(std::move(s));
  }
  return v;
}

double parse_duration_seconds(std::string_view text, TimeUnit default_unit) {
  if (text.empty()) throw Error(Errc::DomainError, "empty duration");
  TimeUnit unit = default_unit;
  if (const char last = text.back(); last == 's' || last == 'm' || last == 'h' || last == 'd') {
    unit = *parse_time_unit(std::string_view(&last, 1));
    text.remove_suffix(1);
  }
  double value = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || p != text.data() + text.size() || !std::isfinite(value)) {
    throw Error(Errc::DomainError, "bad duration '" + std::string(text) + "'");
  }
  return value * unit_divisor(unit);
}

}  // namespace ttm
