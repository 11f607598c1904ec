#pragma once

#include <string>
#include <vector>

#include "provts/classifier.hpp"
#include "provts/core_types.hpp"

namespace provts {

struct InterpretConfig {
  size_t start_len = 100;  // frames in the first window
  size_t step = 30;        // frames added per window (~1 s immersive)
  double confidence_threshold = 0.5;
  std::string indicator_feature = "objPosition.y";
};

/// Cumulative prefix windows: end frame indices {start_len, start_len +
/// step, ...} plus the full length. TraceTooShort if the trace has fewer
/// than start_len frames.
std::vector<size_t> growing_windows(size_t trace_len, size_t start_len, size_t step);

struct TimelineSegment {
  double t_start_s = 0.0;
  double t_end_s = 0.0;
  int category_code = -1;  // -1 = uncertain
  double confidence = 0.0;
};

struct TimelineAnnotation {
  std::string trace_id;
  std::string model_id;
  std::string indicator_feature;
  std::vector<TimelineSegment> segments;  // ordered, covering [t_first, t_last]

  std::string to_json() const;
  std::string to_csv() const;
};

/// Classifies every growing window, attributes window k's label to the
/// span of time it added over window k-1, marks low-confidence spans
/// uncertain (code -1) and merges adjacent equal labels.
TimelineAnnotation annotate(const SessionTrace& trace, const TrainedModel& model,
                            const InterpretConfig& config);

/// Low-confidence marking + merge, exposed for reuse and tests; idempotent.
std::vector<TimelineSegment> merge_segments(std::vector<TimelineSegment> segments,
                                            double confidence_threshold);

/// Strip chart: colored category bands with the indicator feature drawn
/// over them as a black polyline.
std::string timeline_svg(const TimelineAnnotation& annotation, const SessionTrace& trace,
                         const FeatureSchema& schema);

}  // namespace provts
