#include "provts/transform.hpp"

#include <cmath>

namespace provts {

std::string to_string(Stat stat) {
  switch (stat) {
    case Stat::Accumulate: return "acc";
    case Stat::Mean: return "mean";
    case Stat::Std: return "std";
  }
  return "?";
}

Stat stat_from_string(const std::string& name) {
  if (name == "acc") return Stat::Accumulate;
  if (name == "mean") return Stat::Mean;
  if (name == "std") return Stat::Std;
  fail(ErrorCode::InvalidConfig, "unknown statistic '" + name + "'");
}

std::vector<size_t> segment_boundaries(size_t frame_count, size_t segments) {
  if (segments == 0) fail(ErrorCode::InvalidConfig, "segment count must be >= 1");
  std::vector<size_t> bounds(segments + 1);
  for (size_t k = 0; k <= segments; ++k)
    bounds[k] = (frame_count * k + segments - 1) / segments;  // ceil(T*k/l)
  return bounds;
}

std::vector<double> segment_accumulate(const SessionTrace& trace, size_t segments) {
  return segment_stats(trace, segments, {Stat::Accumulate});
}

std::vector<double> segment_stats(const SessionTrace& trace, size_t segments,
                                  const std::vector<Stat>& stats) {
  if (trace.frames.empty()) fail(ErrorCode::EmptyTrial, "trace " + trace.id() + " has no frames");
  if (stats.empty()) fail(ErrorCode::InvalidConfig, "statistics list must be non-empty");
  const size_t d = trace.frames.front().values.size();
  const size_t width = stats.size() * d;
  std::vector<double> out(segments * width, 0.0);
  auto bounds = segment_boundaries(trace.frames.size(), segments);

  std::vector<double> sum(d), sumsq(d);
  for (size_t seg = 0; seg < segments; ++seg) {
    size_t begin = bounds[seg], end = bounds[seg + 1];
    size_t count = end - begin;
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(sumsq.begin(), sumsq.end(), 0.0);
    for (size_t t = begin; t < end; ++t) {
      const auto& values = trace.frames[t].values;
      for (size_t f = 0; f < d; ++f) {
        sum[f] += values[f];
        sumsq[f] += values[f] * values[f];
      }
    }
    double* row = &out[seg * width];
    for (size_t s = 0; s < stats.size(); ++s) {
      for (size_t f = 0; f < d; ++f) {
        double value = 0.0;
        if (count > 0) {
          switch (stats[s]) {
            case Stat::Accumulate: value = sum[f]; break;
            case Stat::Mean: value = sum[f] / static_cast<double>(count); break;
            case Stat::Std: {
              if (count > 1) {
                double mean = sum[f] / static_cast<double>(count);
                double var = sumsq[f] / static_cast<double>(count) - mean * mean;
                value = var > 0.0 ? std::sqrt(var) : 0.0;
              }
              break;
            }
          }
        }
        row[s * d + f] = value;
      }
    }
  }
  return out;
}

FeatureTensor derive_tensor(const std::vector<SessionTrace>& traces, const FeatureSchema& schema,
                            const TransformConfig& config) {
  FeatureTensor tensor;
  tensor.n = traces.size();
  tensor.l = config.segments;
  tensor.d = config.stats.size() * schema.dimension();
  tensor.environment = schema.environment();
  tensor.schema_json = schema.to_json();
  tensor.raw_features = schema.names();
  for (Stat s : config.stats) tensor.stats.push_back(to_string(s));
  tensor.data.assign(tensor.n * tensor.l * tensor.d, 0.0f);
  if (schema.environment() == Environment::Immersive && schema.dimension() == 36)
    tensor.note = "derived width 108 = 36 features x 3 statistics";

  for (size_t i = 0; i < traces.size(); ++i) {
    const auto& trace = traces[i];
    if (trace.frames.empty()) fail(ErrorCode::EmptyTrial, "trace " + trace.id() + " has no frames");
    if (trace.frames.front().values.size() != schema.dimension())
      fail(ErrorCode::DimensionMismatch, "trace " + trace.id() + " does not match schema");
    auto rows = segment_stats(trace, config.segments, config.stats);
    for (size_t j = 0; j < rows.size(); ++j)
      tensor.data[i * tensor.l * tensor.d + j] = static_cast<float>(rows[j]);
    tensor.labels_task.push_back(trace.label ? trace.label->category_code() : -1);
    tensor.labels_space.push_back(trace.label ? trace.label->space_code() : -1);
    tensor.trace_ids.push_back(trace.id());
  }
  return tensor;
}

NormalizationParams fit_normalizer(const FeatureTensor& tensor) {
  if (tensor.n == 0) fail(ErrorCode::InvalidArgument, "cannot fit normalizer on an empty tensor");
  NormalizationParams params;
  params.min.assign(tensor.d, std::numeric_limits<double>::infinity());
  params.max.assign(tensor.d, -std::numeric_limits<double>::infinity());
  for (size_t i = 0; i < tensor.n; ++i)
    for (size_t s = 0; s < tensor.l; ++s)
      for (size_t f = 0; f < tensor.d; ++f) {
        double v = tensor.at(i, s, f);
        if (v < params.min[f]) params.min[f] = v;
        if (v > params.max[f]) params.max[f] = v;
      }
  return params;
}

void apply_normalizer(FeatureTensor& tensor, const NormalizationParams& params) {
  if (params.min.size() != tensor.d || params.max.size() != tensor.d)
    fail(ErrorCode::ShapeMismatch, "normalization parameters do not match tensor width");
  for (size_t i = 0; i < tensor.n; ++i)
    for (size_t s = 0; s < tensor.l; ++s)
      for (size_t f = 0; f < tensor.d; ++f) {
        double lo = params.min[f], hi = params.max[f];
        double v = tensor.at(i, s, f);
        double mapped = hi > lo ? (v - lo) / (hi - lo) : 0.0;
        if (mapped < 0.0) mapped = 0.0;
        if (mapped > 1.0) mapped = 1.0;
        tensor.at(i, s, f) = static_cast<float>(mapped);
      }
  tensor.normalization = params;
  tensor.normalized = true;
}

FeatureTensor build_dataset(const std::vector<SessionTrace>& traces, const FeatureSchema& schema,
                            const TransformConfig& config) {
  FeatureTensor tensor = derive_tensor(traces, schema, config);
  if (tensor.n > 0) {
    auto params = fit_normalizer(tensor);
    apply_normalizer(tensor, params);
  }
  return tensor;
}

FeatureTensor transform_with_params(const SessionTrace& trace, const FeatureSchema& schema,
                                    const TransformConfig& config,
                                    const NormalizationParams& params) {
  FeatureTensor tensor = derive_tensor({trace}, schema, config);
  apply_normalizer(tensor, params);
  return tensor;
}

}  // namespace provts
