#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "provts/tensor.hpp"

namespace provts {

struct KnnConfig {
  size_t k = 30;
  std::optional<size_t> band;  // Sakoe-Chiba half-width in segments; none = full DTW

  std::string to_json() const;
  static KnnConfig from_json(const std::string& text);
};

/// Dependent multivariate DTW over two (length x dim) sequences with the
/// step set {(i-1,j), (i,j-1), (i-1,j-1)} and Euclidean frame cost.
/// `abandon_above`, when finite, allows returning infinity as soon as the
/// running row minimum (a lower bound on the result) exceeds it.
double dtw_distance(const float* a, size_t len_a, const float* b, size_t len_b, size_t dim,
                    std::optional<size_t> band = std::nullopt,
                    double abandon_above = std::numeric_limits<double>::infinity());

double dtw_distance(const std::vector<double>& a, const std::vector<double>& b, size_t dim,
                    std::optional<size_t> band = std::nullopt);

struct KnnPrediction {
  int label = -1;
  std::vector<std::pair<int, size_t>> votes;          // class code -> votes among k
  std::vector<std::pair<double, size_t>> neighbors;   // (distance, train index), ascending
  double top_vote_fraction = 0.0;
};

/// Majority vote over the k nearest training samples by DTW; ties broken
/// by smaller summed distance of the tied classes, then smaller class code.
KnnPrediction knn_predict(const FeatureTensor& train, const std::vector<int>& train_labels,
                          const float* query, size_t query_len, const KnnConfig& config);

}  // namespace provts
