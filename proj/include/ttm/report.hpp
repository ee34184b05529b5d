#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ttm/durability_stats.hpp"
#include "ttm/ttm_engine.hpp"

namespace ttm {

// Per-hunk CSV columns:
//   intro_sha,path,new_start,new_end,author,intro_ts,outcome,ttm_seconds,first_mod_sha
// ttm_seconds and first_mod_sha are empty for censored hunks.
std::string records_to_csv(const std::vector<TTMRecord>& records);
std::vector<TTMRecord> records_from_csv(std::string_view text);

std::string records_to_json(const std::vector<TTMRecord>& records);
std::vector<TTMRecord> records_from_json(std::string_view text);

// Summary CSV columns mirror DurabilitySummary:
//   group_key,unit,n_measured,mttm,median,stddev,min,max,p25,p75,p90,n_censored,n_negative
std::string summaries_to_csv(const std::vector<DurabilitySummary>& summaries);
std::vector<DurabilitySummary> summaries_from_csv(std::string_view text);

std::string summaries_to_json(const std::vector<DurabilitySummary>& summaries);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

struct GateConfig {
  double min_mttm_seconds = 0;
  Grouping::Kind scope = Grouping::Kind::Repo;
  int path_depth = 1;
  std::size_t min_sample = 30;
};

struct GateVerdict {
  bool pass = true;
  std::vector<DurabilitySummary> violations;    // checked and below the threshold
  std::vector<DurabilitySummary> insufficient;  // skipped: n_measured < min_sample
  std::vector<DurabilitySummary> checked;
};

GateVerdict evaluate_gate(const std::vector<TTMRecord>& records, const GateConfig& config);

// "90", "90s", "15m", "3h", "2d" (a bare number is read in `default_unit`).
double parse_duration_seconds(std::string_view text, TimeUnit default_unit);

}  // namespace ttm
