#include "provts/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "provts/transform.hpp"

namespace provts {

using nlohmann::json;

std::vector<size_t> growing_windows(size_t trace_len, size_t start_len, size_t step) {
  if (step < 1) fail(ErrorCode::InvalidArgument, "step must be >= 1");
  if (start_len < 1) fail(ErrorCode::InvalidArgument, "start_len must be >= 1");
  if (trace_len < start_len)
    fail(ErrorCode::TraceTooShort, "trace has " + std::to_string(trace_len) +
                                       " frames, window start needs " + std::to_string(start_len));
  std::vector<size_t> ends;
  for (size_t end = start_len; end < trace_len; end += step) ends.push_back(end);
  ends.push_back(trace_len);
  return ends;
}

std::vector<TimelineSegment> merge_segments(std::vector<TimelineSegment> segments,
                                            double confidence_threshold) {
  for (auto& s : segments)
    if (s.confidence < confidence_threshold) s.category_code = -1;

  std::vector<TimelineSegment> merged;
  for (const auto& s : segments) {
    if (!merged.empty() && merged.back().category_code == s.category_code) {
      TimelineSegment& prev = merged.back();
      double d_prev = prev.t_end_s - prev.t_start_s;
      double d_new = s.t_end_s - s.t_start_s;
      double total = d_prev + d_new;
      prev.confidence = total > 0.0
                            ? (prev.confidence * d_prev + s.confidence * d_new) / total
                            : std::max(prev.confidence, s.confidence);
      prev.t_end_s = s.t_end_s;
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

TimelineAnnotation annotate(const SessionTrace& trace, const TrainedModel& model,
                            const InterpretConfig& config) {
  FeatureSchema schema = FeatureSchema::from_json(model.schema_json);
  auto ends = growing_windows(trace.frames.size(), config.start_len, config.step);

  // Window count x (1, l, d) transforms are independent; classify each
  // cumulative prefix, then attribute the label to the newly added span.
  std::vector<int> window_labels(ends.size());
  std::vector<double> window_confidence(ends.size());
  parallel_for(ends.size(), model.config.jobs, [&](size_t w) {
    SessionTrace prefix;
    prefix.participant_id = trace.participant_id;
    prefix.environment = trace.environment;
    prefix.trial_index = trace.trial_index;
    prefix.sample_rate_hint = trace.sample_rate_hint;
    prefix.frames.assign(trace.frames.begin(),
                         trace.frames.begin() + static_cast<long>(ends[w]));
    FeatureTensor tensor =
        transform_with_params(prefix, schema, model.transform, model.normalization);
    auto prediction = model.classifier->predict(tensor);
    window_labels[w] = prediction.labels[0];
    window_confidence[w] = prediction.confidence[0];
  });

  TimelineAnnotation annotation;
  annotation.trace_id = trace.id();
  annotation.model_id = to_string(model.config.kind) + "/" + to_string(model.scale);
  annotation.indicator_feature = config.indicator_feature;

  std::vector<TimelineSegment> segments;
  double span_start = trace.frames.front().timestamp;
  for (size_t w = 0; w < ends.size(); ++w) {
    double span_end = trace.frames[ends[w] - 1].timestamp;
    segments.push_back({span_start, span_end, window_labels[w], window_confidence[w]});
    span_start = span_end;
  }
  annotation.segments = merge_segments(std::move(segments), config.confidence_threshold);
  return annotation;
}

std::string TimelineAnnotation::to_json() const {
  json doc;
  doc["trace"] = trace_id;
  doc["model"] = model_id;
  doc["indicator_feature"] = indicator_feature;
  json segs = json::array();
  for (const auto& s : segments)
    segs.push_back({{"t_start_s", s.t_start_s},
                    {"t_end_s", s.t_end_s},
                    {"category_code", s.category_code},
                    {"confidence", s.confidence}});
  doc["segments"] = segs;
  return doc.dump(2) + "\n";
}

std::string TimelineAnnotation::to_csv() const {
  std::ostringstream out;
  out << "t_start_s,t_end_s,category_code,confidence\n";
  for (const auto& s : segments)
    out << s.t_start_s << ',' << s.t_end_s << ',' << s.category_code << ',' << s.confidence
        << '\n';
  return out.str();
}

namespace {

const char* space_color(int category_code) {
  if (category_code < 0) return "#bdbdbd";
  switch (category_code / 10) {
    case 0: return "#4c78a8";  // spatial
    case 1: return "#f58518";  // temporal
    case 2: return "#54a24b";  // combined
    default: return "#b279a2";
  }
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(2);
  out << std::fixed << v;
  return out.str();
}

}  // namespace

std::string timeline_svg(const TimelineAnnotation& annotation, const SessionTrace& trace,
                         const FeatureSchema& schema) {
  const double width = 900.0, band_h = 60.0, margin = 30.0;
  const double height = band_h + 2.0 * margin;
  double t0 = trace.frames.front().timestamp;
  double t1 = trace.frames.back().timestamp;
  double span = std::max(t1 - t0, 1e-9);
  auto to_x = [&](double t) { return margin + (t - t0) / span * (width - 2.0 * margin); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  for (const auto& s : annotation.segments) {
    svg << "  <rect x=\"" << fmt(to_x(s.t_start_s)) << "\" y=\"" << fmt(margin) << "\" width=\""
        << fmt(std::max(0.5, to_x(s.t_end_s) - to_x(s.t_start_s))) << "\" height=\"" << fmt(band_h)
        << "\" fill=\"" << space_color(s.category_code) << "\">\n"
        << "    <title>category " << s.category_code << " (confidence "
        << fmt(s.confidence) << ")</title>\n  </rect>\n";
  }

  auto feature = schema.find(annotation.indicator_feature);
  if (feature && !trace.frames.empty()) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& f : trace.frames) {
      lo = std::min(lo, f.values[*feature]);
      hi = std::max(hi, f.values[*feature]);
    }
    double range = std::max(hi - lo, 1e-9);
    size_t stride = std::max<size_t>(1, trace.frames.size() / 600);
    svg << "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
    for (size_t i = 0; i < trace.frames.size(); i += stride) {
      const auto& f = trace.frames[i];
      double y = margin + band_h - (f.values[*feature] - lo) / range * band_h;
      svg << fmt(to_x(f.timestamp)) << ',' << fmt(y) << ' ';
    }
    svg << "\"/>\n";
  }
  svg << "  <text x=\"" << fmt(margin) << "\" y=\"" << fmt(height - 8.0)
      << "\" font-size=\"12\" font-family=\"monospace\">" << annotation.trace_id << " | "
      << annotation.model_id << " | indicator: " << annotation.indicator_feature << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace provts
