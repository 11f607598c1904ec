#include "provts/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace provts {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_int(const std::string& s, int& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

std::string format_value(double v) {
  // Shortest round-trip form, stable across runs.
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct RawRow {
  std::string participant_id;
  int trial_index = 0;
  int label_code = -1;
  double timestamp = 0.0;
  std::vector<double> values;
};

class TraceBuilder {
 public:
  TraceBuilder(Environment env, const FeatureSchema& schema) : env_(env), schema_(schema) {}

  void add(const RawRow& row, size_t line, std::vector<ParseIssue>& issues) {
    auto key = std::make_pair(row.participant_id, row.trial_index);
    auto it = index_.find(key);
    if (it == index_.end()) {
      SessionTrace trace;
      trace.participant_id = row.participant_id;
      trace.environment = env_;
      trace.trial_index = row.trial_index;
      trace.sample_rate_hint = env_ == Environment::Immersive ? 30.0 : 10.0;
      if (row.label_code >= 0) trace.label = decode_category(row.label_code);
      index_[key] = traces_.size();
      traces_.push_back(std::move(trace));
      it = index_.find(key);
    }
    SessionTrace& trace = traces_[it->second];
    if (!trace.frames.empty() && row.timestamp < trace.frames.back().timestamp)
      fail(ErrorCode::NonMonotonicTime,
           "line " + std::to_string(line) + ": timestamp " + format_value(row.timestamp) +
               " regresses within trial " + trace.id());
    BehaviorFrame frame{row.timestamp, row.values};
    try {
      validate_frame(frame, schema_);
    } catch (const Error& e) {
      issues.push_back({line, e.what()});
      return;
    }
    trace.frames.push_back(std::move(frame));
  }

  std::vector<SessionTrace> finish() {
    for (const auto& trace : traces_)
      if (trace.frames.empty())
        fail(ErrorCode::EmptyTrial, "trial " + trace.id() + " has no valid frames");
    return std::move(traces_);
  }

 private:
  Environment env_;
  const FeatureSchema& schema_;
  std::vector<SessionTrace> traces_;
  std::map<std::pair<std::string, int>, size_t> index_;
};

const std::vector<std::string>& fixed_columns() {
  static const std::vector<std::string> cols = {"participant_id", "environment", "trial_index",
                                                "label_code", "timestamp_s"};
  return cols;
}

ParseResult parse_csv(std::istream& stream, Environment env, const FeatureSchema& schema) {
  ParseResult result;
  std::string line;
  if (!std::getline(stream, line)) fail(ErrorCode::ParseError, "empty log: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  auto header = split_csv_line(line);
  std::vector<std::string> expected = fixed_columns();
  for (const auto& name : schema.names()) expected.push_back(name);
  if (header != expected) {
    std::string detail = "header does not match " + to_string(schema.environment()) +
                         " schema " + schema.version();
    for (size_t i = 0; i < std::max(header.size(), expected.size()); ++i) {
      std::string got = i < header.size() ? header[i] : "<missing>";
      std::string want = i < expected.size() ? expected[i] : "<extra>";
      if (got != want) {
        detail += "; column " + std::to_string(i) + ": got '" + got + "', want '" + want + "'";
        break;
      }
    }
    fail(ErrorCode::SchemaMismatch, detail);
  }

  TraceBuilder builder(env, schema);
  const size_t d = schema.dimension();
  size_t line_no = 1;
  std::string expected_env = to_string(env);
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 5 + d) {
      result.issues.push_back({line_no, "expected " + std::to_string(5 + d) + " fields, got " +
                                            std::to_string(fields.size())});
      continue;
    }
    RawRow row;
    row.participant_id = fields[0];
    if (fields[1] != expected_env) {
      result.issues.push_back({line_no, "environment '" + fields[1] + "' does not match '" +
                                            expected_env + "'"});
      continue;
    }
    if (!parse_int(fields[2], row.trial_index) || !parse_int(fields[3], row.label_code) ||
        !parse_double(fields[4], row.timestamp)) {
      result.issues.push_back({line_no, "malformed trial/label/timestamp field"});
      continue;
    }
    row.values.resize(d);
    bool ok = true;
    for (size_t f = 0; f < d; ++f)
      if (!parse_double(fields[5 + f], row.values[f])) {
        result.issues.push_back({line_no, "malformed value for '" + schema.entry(f).name + "'"});
        ok = false;
        break;
      }
    if (!ok) continue;
    builder.add(row, line_no, result.issues);
  }
  result.traces = builder.finish();
  return result;
}

ParseResult parse_jsonl(std::istream& stream, Environment env, const FeatureSchema& schema) {
  ParseResult result;
  TraceBuilder builder(env, schema);
  std::string line;
  size_t line_no = 0;
  std::string expected_env = to_string(env);
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      result.issues.push_back({line_no, "not a JSON object"});
      continue;
    }
    try {
      RawRow row;
      row.participant_id = obj.at("participant_id").get<std::string>();
      if (obj.at("environment").get<std::string>() != expected_env) {
        result.issues.push_back({line_no, "environment mismatch"});
        continue;
      }
      row.trial_index = obj.at("trial_index").get<int>();
      row.label_code = obj.at("label_code").get<int>();
      row.timestamp = obj.at("timestamp_s").get<double>();
      row.values.reserve(schema.dimension());
      for (const auto& e : schema.entries()) {
        if (!obj.contains(e.name))
          fail(ErrorCode::SchemaMismatch, "missing feature '" + e.name + "'");
        row.values.push_back(obj.at(e.name).get<double>());
      }
      builder.add(row, line_no, result.issues);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NonMonotonicTime || e.code() == ErrorCode::EmptyTrial) throw;
      result.issues.push_back({line_no, e.what()});
    } catch (const json::exception& e) {
      result.issues.push_back({line_no, e.what()});
    }
  }
  result.traces = builder.finish();
  return result;
}

}  // namespace

ParseResult parse_log(std::istream& stream, Environment env, const FeatureSchema& schema,
                      LogFormat format) {
  return format == LogFormat::Csv ? parse_csv(stream, env, schema)
                                  : parse_jsonl(stream, env, schema);
}

ParseResult parse_log_file(const std::string& path, Environment env, const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  LogFormat format = path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl"
                         ? LogFormat::Jsonl
                         : LogFormat::Csv;
  return parse_log(in, env, schema, format);
}

void write_log_csv(std::ostream& out, const std::vector<SessionTrace>& traces,
                   const FeatureSchema& schema) {
  for (const auto& col : fixed_columns()) {
    if (&col != &fixed_columns().front()) out << ',';
    out << col;
  }
  for (const auto& name : schema.names()) out << ',' << name;
  out << '\n';
  for (const auto& trace : traces) {
    std::string prefix = trace.participant_id + "," + to_string(trace.environment) + "," +
                         std::to_string(trace.trial_index) + "," +
                         std::to_string(trace.label ? trace.label->category_code() : -1) + ",";
    for (const auto& frame : trace.frames) {
      out << prefix << format_value(frame.timestamp);
      for (double v : frame.values) out << ',' << format_value(v);
      out << '\n';
    }
  }
}

void write_log_jsonl(std::ostream& out, const std::vector<SessionTrace>& traces,
                     const FeatureSchema& schema) {
  for (const auto& trace : traces) {
    for (const auto& frame : trace.frames) {
      json obj;
      obj["participant_id"] = trace.participant_id;
      obj["environment"] = to_string(trace.environment);
      obj["trial_index"] = trace.trial_index;
      obj["label_code"] = trace.label ? trace.label->category_code() : -1;
      obj["timestamp_s"] = frame.timestamp;
      for (size_t f = 0; f < schema.dimension(); ++f)
        obj[schema.entry(f).name] = frame.values[f];
      out << obj.dump() << '\n';
    }
  }
}

std::vector<ExclusionInterval> parse_exclusion_intervals(std::istream& stream) {
  std::vector<ExclusionInterval> intervals;
  std::string line;
  size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("participant_id", 0) == 0) continue;  // optional header
    auto fields = split_csv_line(line);
    ExclusionInterval iv;
    if (fields.size() != 4 || !parse_int(fields[1], iv.trial_index) ||
        !parse_double(fields[2], iv.t_start_s) || !parse_double(fields[3], iv.t_end_s))
      fail(ErrorCode::ParseError, "exclusion intervals line " + std::to_string(line_no));
    iv.participant_id = fields[0];
    intervals.push_back(std::move(iv));
  }
  return intervals;
}

std::vector<SessionTrace> drop_excluded_spans(std::vector<SessionTrace> traces,
                                              const std::vector<ExclusionInterval>& intervals) {
  if (intervals.empty()) return traces;
  for (auto& trace : traces) {
    auto excluded = [&](double t) {
      for (const auto& iv : intervals)
        if (iv.participant_id == trace.participant_id && iv.trial_index == trace.trial_index &&
            t >= iv.t_start_s && t <= iv.t_end_s)
          return true;
      return false;
    };
    std::erase_if(trace.frames, [&](const BehaviorFrame& f) { return excluded(f.timestamp); });
  }
  std::erase_if(traces, [](const SessionTrace& t) { return t.frames.empty(); });
  return traces;
}

// -------------------------------------------------------------------------
// Predicate parser (recursive descent).

namespace {

enum class Aggregate { Count, Max, Min, Any, Last };

double evaluate_aggregate(Aggregate agg, size_t feature, const SessionTrace& trace) {
  switch (agg) {
    case Aggregate::Count: {
      size_t count = 0;
      for (const auto& f : trace.frames) count += f.values[feature] != 0.0;
      return static_cast<double>(count);
    }
    case Aggregate::Max: {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& f : trace.frames) best = std::max(best, f.values[feature]);
      return best;
    }
    case Aggregate::Min: {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& f : trace.frames) best = std::min(best, f.values[feature]);
      return best;
    }
    case Aggregate::Any: {
      for (const auto& f : trace.frames)
        if (f.values[feature] != 0.0) return 1.0;
      return 0.0;
    }
    case Aggregate::Last:
      return trace.frames.empty() ? 0.0 : trace.frames.back().values[feature];
  }
  return 0.0;
}

struct Value {
  bool is_literal = false;
  double literal = 0.0;
  Aggregate aggregate = Aggregate::Count;
  size_t feature = 0;

  double evaluate(const SessionTrace& trace) const {
    return is_literal ? literal : evaluate_aggregate(aggregate, feature, trace);
  }
};

enum class CmpOp { Ge, Le, Gt, Lt, Eq, Ne };

struct Comparison : Predicate {
  Value lhs, rhs;
  CmpOp op;
  bool evaluate(const SessionTrace& trace) const override {
    double a = lhs.evaluate(trace), b = rhs.evaluate(trace);
    switch (op) {
      case CmpOp::Ge: return a >= b;
      case CmpOp::Le: return a <= b;
      case CmpOp::Gt: return a > b;
      case CmpOp::Lt: return a < b;
      case CmpOp::Eq: return a == b;
      case CmpOp::Ne: return a != b;
    }
    return false;
  }
};

struct NotNode : Predicate {
  std::shared_ptr<const Predicate> inner;
  bool evaluate(const SessionTrace& trace) const override { return !inner->evaluate(trace); }
};

struct AndNode : Predicate {
  std::vector<std::shared_ptr<const Predicate>> terms;
  bool evaluate(const SessionTrace& trace) const override {
    for (const auto& t : terms)
      if (!t->evaluate(trace)) return false;
    return true;
  }
};

struct OrNode : Predicate {
  std::vector<std::shared_ptr<const Predicate>> terms;
  bool evaluate(const SessionTrace& trace) const override {
    for (const auto& t : terms)
      if (t->evaluate(trace)) return true;
    return false;
  }
};

class PredicateParser {
 public:
  PredicateParser(const std::string& text, const FeatureSchema& schema)
      : text_(text), schema_(schema) {}

  std::shared_ptr<const Predicate> parse() {
    auto node = parse_or();
    skip_space();
    if (pos_ != text_.size())
      fail(ErrorCode::ParseError, "trailing input in predicate at offset " + std::to_string(pos_));
    return node;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume_word(const char* word) {
    skip_space();
    size_t len = std::strlen(word);
    if (text_.compare(pos_, len, word) != 0) return false;
    size_t next = pos_ + len;
    if (next < text_.size() &&
        (std::isalnum(static_cast<unsigned char>(text_[next])) || text_[next] == '_'))
      return false;
    pos_ = next;
    return true;
  }

  bool consume(const char* tok) {
    skip_space();
    size_t len = std::strlen(tok);
    if (text_.compare(pos_, len, tok) != 0) return false;
    pos_ += len;
    return true;
  }

  std::shared_ptr<const Predicate> parse_or() {
    auto node = std::make_shared<OrNode>();
    node->terms.push_back(parse_and());
    while (consume_word("OR")) node->terms.push_back(parse_and());
    if (node->terms.size() == 1) return node->terms.front();
    return node;
  }

  std::shared_ptr<const Predicate> parse_and() {
    auto node = std::make_shared<AndNode>();
    node->terms.push_back(parse_unary());
    while (consume_word("AND")) node->terms.push_back(parse_unary());
    if (node->terms.size() == 1) return node->terms.front();
    return node;
  }

  std::shared_ptr<const Predicate> parse_unary() {
    if (consume_word("NOT")) {
      auto node = std::make_shared<NotNode>();
      node->inner = parse_unary();
      return node;
    }
    if (consume("(")) {
      auto node = parse_or();
      if (!consume(")")) fail(ErrorCode::ParseError, "expected ')' in predicate");
      return node;
    }
    return parse_comparison();
  }

  std::shared_ptr<const Predicate> parse_comparison() {
    auto node = std::make_shared<Comparison>();
    node->lhs = parse_value();
    skip_space();
    if (consume(">=")) node->op = CmpOp::Ge;
    else if (consume("<=")) node->op = CmpOp::Le;
    else if (consume("==")) node->op = CmpOp::Eq;
    else if (consume("!=")) node->op = CmpOp::Ne;
    else if (consume(">")) node->op = CmpOp::Gt;
    else if (consume("<")) node->op = CmpOp::Lt;
    else fail(ErrorCode::ParseError, "expected comparison operator at offset " + std::to_string(pos_));
    node->rhs = parse_value();
    return node;
  }

  Value parse_value() {
    skip_space();
    if (pos_ >= text_.size()) fail(ErrorCode::ParseError, "unexpected end of predicate");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      size_t end = pos_;
      while (end < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.' ||
              text_[end] == '-' || text_[end] == '+' || text_[end] == 'e' || text_[end] == 'E'))
        ++end;
      Value v;
      v.is_literal = true;
      if (!parse_double(text_.substr(pos_, end - pos_), v.literal))
        fail(ErrorCode::ParseError, "bad number at offset " + std::to_string(pos_));
      pos_ = end;
      return v;
    }
    static const std::pair<const char*, Aggregate> kAggregates[] = {
        {"count", Aggregate::Count}, {"max", Aggregate::Max}, {"min", Aggregate::Min},
        {"any", Aggregate::Any},     {"last", Aggregate::Last}};
    for (const auto& [name, agg] : kAggregates) {
      if (consume_word(name)) {
        if (!consume("(")) fail(ErrorCode::ParseError, std::string("expected '(' after ") + name);
        skip_space();
        size_t end = pos_;
        while (end < text_.size() && text_[end] != ')' &&
               !std::isspace(static_cast<unsigned char>(text_[end])))
          ++end;
        std::string feature = text_.substr(pos_, end - pos_);
        pos_ = end;
        if (!consume(")")) fail(ErrorCode::ParseError, "expected ')' after feature name");
        Value v;
        v.aggregate = agg;
        v.feature = schema_.index_of(feature);  // throws UnknownFeature
        return v;
      }
    }
    fail(ErrorCode::ParseError, "expected number or aggregate at offset " + std::to_string(pos_));
  }

  const std::string& text_;
  const FeatureSchema& schema_;
  size_t pos_ = 0;
};

}  // namespace

std::shared_ptr<const Predicate> parse_predicate(const std::string& text,
                                                 const FeatureSchema& schema) {
  return PredicateParser(text, schema).parse();
}

std::vector<GoldenRule> parse_golden_rules(const std::string& json_text,
                                           const FeatureSchema& schema) {
  json doc = json::parse(json_text);
  std::vector<GoldenRule> rules;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    GoldenRule rule;
    int code = 0;
    if (!parse_int(it.key(), code))
      fail(ErrorCode::ParseError, "golden rule key '" + it.key() + "' is not a category code");
    rule.label_selector.insert(code);
    rule.predicate_text = it.value().get<std::string>();
    rule.predicate = parse_predicate(rule.predicate_text, schema);
    rules.push_back(std::move(rule));
  }
  return rules;
}

FilterSplit filter_min_duration(const std::vector<SessionTrace>& traces, double threshold_s) {
  if (threshold_s <= 0) fail(ErrorCode::InvalidArgument, "duration threshold must be positive");
  FilterSplit split;
  for (const auto& trace : traces) {
    if (trace.duration_s() >= threshold_s)
      split.kept.push_back(trace);
    else
      split.dropped.push_back(trace);
  }
  return split;
}

GoldenSplit apply_golden_rules(const std::vector<SessionTrace>& traces,
                               const std::vector<GoldenRule>& rules) {
  GoldenSplit split;
  for (const auto& trace : traces) {
    int failing = -1;
    if (trace.label) {
      int code = trace.label->category_code();
      for (const auto& rule : rules) {
        if (rule.label_selector.count(code) && !rule.predicate->evaluate(trace)) {
          failing = code;
          break;
        }
      }
    }
    if (failing >= 0)
      split.dropped.emplace_back(trace, failing);
    else
      split.kept.push_back(trace);
  }
  return split;
}

std::vector<SessionTrace> exclude_interaction_tasks(const std::vector<SessionTrace>& traces) {
  std::vector<SessionTrace> kept;
  for (const auto& trace : traces)
    if (!(trace.label && trace.label->space == Space::Interaction)) kept.push_back(trace);
  return kept;
}

std::string CleanReport::to_json() const {
  json doc;
  doc["total_in"] = total_in;
  doc["dropped_short"] = dropped_short;
  doc["dropped_golden"] = dropped_golden;
  doc["kept"] = kept;
  doc["excluded_interaction"] = excluded_interaction;
  json reasons_json = json::array();
  for (const auto& [id, reason] : reasons) reasons_json.push_back({{"trace", id}, {"reason", reason}});
  doc["reasons"] = reasons_json;
  return doc.dump(2) + "\n";
}

CleanResult clean(const std::vector<SessionTrace>& traces, double min_duration_s,
                  const std::vector<GoldenRule>& rules) {
  CleanResult result;
  result.report.total_in = traces.size();

  auto duration_split = filter_min_duration(traces, min_duration_s);
  result.report.dropped_short = duration_split.dropped.size();
  for (const auto& t : duration_split.dropped)
    result.report.reasons.emplace_back(t.id(), "shorter than " + std::to_string(min_duration_s) + " s");

  auto golden_split = apply_golden_rules(duration_split.kept, rules);
  result.report.dropped_golden = golden_split.dropped.size();
  for (const auto& [t, code] : golden_split.dropped)
    result.report.reasons.emplace_back(t.id(), "failed golden rule for category " + std::to_string(code));

  result.report.kept = golden_split.kept.size();

  result.traces = exclude_interaction_tasks(golden_split.kept);
  result.report.excluded_interaction = result.report.kept - result.traces.size();
  for (const auto& t : golden_split.kept)
    if (t.label && t.label->space == Space::Interaction)
      result.report.reasons.emplace_back(t.id(), "interaction-space trial excluded");
  return result;
}

}  // namespace provts
