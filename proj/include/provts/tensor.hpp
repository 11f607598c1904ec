#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "provts/core_types.hpp"

namespace provts {

/// Per-derived-column min/max fitted on training data.
struct NormalizationParams {
  std::vector<double> min;
  std::vector<double> max;

  bool empty() const { return min.empty(); }
  bool operator==(const NormalizationParams&) const = default;
};

/// Fixed-shape transformed dataset: n samples x l segments x d derived
/// features, row-major. Labels carry both scales; -1 marks an unlabeled
/// (open) sample.
struct FeatureTensor {
  size_t n = 0;
  size_t l = 0;
  size_t d = 0;
  std::vector<float> data;

  std::vector<int> labels_task;
  std::vector<int> labels_space;
  std::vector<std::string> trace_ids;

  Environment environment = Environment::Immersive;
  std::string schema_json;            // raw feature schema this was derived from
  std::vector<std::string> raw_features;
  std::vector<std::string> stats;     // e.g. {"acc","mean","std"}; columns are stat-major
  NormalizationParams normalization;  // empty until fitted
  bool normalized = false;
  std::string note;

  size_t raw_dimension() const { return raw_features.size(); }

  float at(size_t sample, size_t segment, size_t feature) const {
    return data[(sample * l + segment) * d + feature];
  }
  float& at(size_t sample, size_t segment, size_t feature) {
    return data[(sample * l + segment) * d + feature];
  }
  std::span<const float> sample(size_t i) const {
    return std::span<const float>(data).subspan(i * l * d, l * d);
  }

  size_t column_index(size_t stat, size_t raw) const { return stat * raw_dimension() + raw; }
  std::string derived_name(size_t column) const;
  /// All column indices derived from one raw feature (one per statistic).
  std::vector<size_t> columns_of_raw(size_t raw) const;

  const std::vector<int>& labels(bool space_scale) const {
    return space_scale ? labels_space : labels_task;
  }

  std::string schema_hash() const { return to_hex(fnv1a64(schema_json)); }

  /// Sub-tensor with the given samples, order preserved.
  FeatureTensor select_samples(const std::vector<size_t>& indices) const;
  /// Sub-tensor with only the given derived columns, order preserved.
  FeatureTensor select_columns(const std::vector<size_t>& columns) const;
};

/// Writes `<path>.bin` (little-endian f32) and `<path>.meta.json`.
void save_tensor(const FeatureTensor& tensor, const std::string& path_prefix);
FeatureTensor load_tensor(const std::string& path_prefix);

}  // namespace provts
