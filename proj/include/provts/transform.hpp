#pragma once

#include <string>
#include <vector>

#include "provts/core_types.hpp"
#include "provts/tensor.hpp"

namespace provts {

enum class Stat { Accumulate, Mean, Std };

std::string to_string(Stat stat);
Stat stat_from_string(const std::string& name);

/// Variable-length traces are aligned by splitting each one into l
/// contiguous segments and summarizing every segment per feature. With the
/// default statistics the output width is 3 x raw dimension, laid out
/// stat-major: [all acc | all mean | all std].
struct TransformConfig {
  size_t segments = 100;
  std::vector<Stat> stats = {Stat::Accumulate, Stat::Mean, Stat::Std};
};

/// Frame index boundaries: segment k covers [bounds[k], bounds[k+1]).
/// bounds[k] = ceil(T*k/l); segments can be empty when T < l.
std::vector<size_t> segment_boundaries(size_t frame_count, size_t segments);

/// Per-segment, per-feature sums; l x d row-major. Empty segments are zero.
std::vector<double> segment_accumulate(const SessionTrace& trace, size_t segments);

/// Requested statistics for every segment and feature, stat-major per row:
/// row s = [stat0(f0..fd) | stat1(f0..fd) | ...]. Std is the population
/// estimator and 0 for segments of size <= 1; empty segments yield zeros.
std::vector<double> segment_stats(const SessionTrace& trace, size_t segments,
                                  const std::vector<Stat>& stats);

/// Derived (unnormalized) tensor for a set of traces, input order kept.
FeatureTensor derive_tensor(const std::vector<SessionTrace>& traces, const FeatureSchema& schema,
                            const TransformConfig& config);

/// Per-column (min, max) over all samples and segments.
NormalizationParams fit_normalizer(const FeatureTensor& tensor);

/// Min-max maps every column into [0,1], clamping out-of-range values;
/// constant columns map to 0.
void apply_normalizer(FeatureTensor& tensor, const NormalizationParams& params);

/// derive + fit + apply; the one-stop path used by the CLI.
FeatureTensor build_dataset(const std::vector<SessionTrace>& traces, const FeatureSchema& schema,
                            const TransformConfig& config);

/// Transforms a single trace with previously fitted parameters (the
/// prediction-time path, "processed in the same manner as the training
/// data").
FeatureTensor transform_with_params(const SessionTrace& trace, const FeatureSchema& schema,
                                    const TransformConfig& config,
                                    const NormalizationParams& params);

}  // namespace provts
