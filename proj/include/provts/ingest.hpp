#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "provts/core_types.hpp"

namespace provts {

enum class LogFormat { Csv, Jsonl };

struct ParseIssue {
  size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<SessionTrace> traces;
  std::vector<ParseIssue> issues;  // malformed rows, skipped
};

/// Reads behavior logs. CSV header (mandatory):
///   participant_id,environment,trial_index,label_code,timestamp_s,<schema names...>
/// JSONL carries the same fields as one flat object per line. Frames are
/// grouped by (participant_id, trial_index) in first-appearance order;
/// label_code -1 marks an open (unlabeled) trial.
ParseResult parse_log(std::istream& stream, Environment env, const FeatureSchema& schema,
                      LogFormat format = LogFormat::Csv);
ParseResult parse_log_file(const std::string& path, Environment env, const FeatureSchema& schema);

void write_log_csv(std::ostream& out, const std::vector<SessionTrace>& traces,
                   const FeatureSchema& schema);
void write_log_jsonl(std::ostream& out, const std::vector<SessionTrace>& traces,
                     const FeatureSchema& schema);

// -------------------------------------------------------------------------
// Manually recorded interruption spans; frames inside them are dropped
// before filtering. CSV columns: participant_id,trial_index,t_start_s,t_end_s.

struct ExclusionInterval {
  std::string participant_id;
  int trial_index = 0;
  double t_start_s = 0.0;
  double t_end_s = 0.0;
};

std::vector<ExclusionInterval> parse_exclusion_intervals(std::istream& stream);
std::vector<SessionTrace> drop_excluded_spans(std::vector<SessionTrace> traces,
                                              const std::vector<ExclusionInterval>& intervals);

// -------------------------------------------------------------------------
// Golden rules: per-category predicates over trace aggregates, e.g.
//   count(selected_state_index) >= 1 AND max(selected_time) > 0.5
// Grammar: OR / AND / NOT over comparisons (>, >=, <, <=, ==, !=) between
// numbers and aggregate(feature) terms; aggregates are count, max, min,
// any, last. count(f) counts frames with f != 0.

class Predicate {
 public:
  virtual ~Predicate() = default;
  virtual bool evaluate(const SessionTrace& trace) const = 0;
};

/// Parses a predicate, resolving feature names against the schema
/// (UnknownFeature on miss, ParseError on bad syntax).
std::shared_ptr<const Predicate> parse_predicate(const std::string& text,
                                                 const FeatureSchema& schema);

struct GoldenRule {
  std::set<int> label_selector;  // category codes the rule applies to
  std::string predicate_text;
  std::shared_ptr<const Predicate> predicate;
};

/// JSON object mapping category codes to predicate strings:
///   { "7": "count(tap) >= 1", "11": "any(chart_slot_0) == 1" }
std::vector<GoldenRule> parse_golden_rules(const std::string& json_text,
                                           const FeatureSchema& schema);

// -------------------------------------------------------------------------
// Cleaning filters. All are pure per-trace predicates, so they are
// idempotent and order-independent on the kept set.

struct FilterSplit {
  std::vector<SessionTrace> kept;
  std::vector<SessionTrace> dropped;
};

/// Keeps traces spanning at least threshold_s seconds (boundary inclusive).
FilterSplit filter_min_duration(const std::vector<SessionTrace>& traces, double threshold_s = 2.0);

struct GoldenSplit {
  std::vector<SessionTrace> kept;
  std::vector<std::pair<SessionTrace, int>> dropped;  // trace + failing rule's category code
};

/// A labeled trace matched by a rule's selector is kept iff the predicate
/// holds; unlabeled or unmatched traces pass through.
GoldenSplit apply_golden_rules(const std::vector<SessionTrace>& traces,
                               const std::vector<GoldenRule>& rules);

/// Removes interaction-space trials (they never enter classification sets).
std::vector<SessionTrace> exclude_interaction_tasks(const std::vector<SessionTrace>& traces);

struct CleanReport {
  size_t total_in = 0;
  size_t dropped_short = 0;
  size_t dropped_golden = 0;
  size_t kept = 0;  // total_in == dropped_short + dropped_golden + kept
  // Applied after the cleaning identity above; informational.
  size_t excluded_interaction = 0;
  std::vector<std::pair<std::string, std::string>> reasons;  // trace id -> reason

  std::string to_json() const;
};

struct CleanResult {
  std::vector<SessionTrace> traces;
  CleanReport report;
};

/// duration filter -> golden rules -> interaction exclusion.
CleanResult clean(const std::vector<SessionTrace>& traces, double min_duration_s,
                  const std::vector<GoldenRule>& rules);

}  // namespace provts
