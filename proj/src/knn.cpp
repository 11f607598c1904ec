#include "provts/knn.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

namespace provts {

using nlohmann::json;

std::string KnnConfig::to_json() const {
  json doc;
  doc["k"] = k;
  if (band)
    doc["band"] = *band;
  else
    doc["band"] = nullptr;
  return doc.dump(2) + "\n";
}

KnnConfig KnnConfig::from_json(const std::string& text) {
  json doc = json::parse(text);
  KnnConfig config;
  config.k = doc.value("k", size_t{30});
  if (doc.contains("band") && !doc.at("band").is_null())
    config.band = doc.at("band").get<size_t>();
  if (config.k < 1) fail(ErrorCode::InvalidConfig, "k must be >= 1");
  return config;
}

namespace {

inline double frame_distance(const float* a, const float* b, size_t dim) {
  double acc = 0.0;
  for (size_t f = 0; f < dim; ++f) {
    double diff = static_cast<double>(a[f]) - static_cast<double>(b[f]);
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

}  // namespace

double dtw_distance(const float* a, size_t len_a, const float* b, size_t len_b, size_t dim,
                    std::optional<size_t> band, double abandon_above) {
  if (len_a == 0 || len_b == 0) fail(ErrorCode::InvalidArgument, "DTW needs non-empty sequences");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Band is interpreted on the |i - j| lattice; it must admit the corner.
  size_t min_band = len_a > len_b ? len_a - len_b : len_b - len_a;
  size_t w = band ? std::max(*band, min_band) : std::max(len_a, len_b);

  std::vector<double> prev(len_b, kInf), curr(len_b, kInf);
  for (size_t i = 0; i < len_a; ++i) {
    size_t j_begin = i >= w ? i - w : 0;
    size_t j_end = std::min(len_b - 1, i + w);
    std::fill(curr.begin(), curr.end(), kInf);
    double row_min = kInf;
    const float* ai = a + i * dim;
    for (size_t j = j_begin; j <= j_end; ++j) {
      double best;
      if (i == 0 && j == 0)
        best = 0.0;
      else {
        best = prev[j];                                    // (i-1, j)
        if (j > 0 && curr[j - 1] < best) best = curr[j - 1];  // (i, j-1)
        if (i > 0 && j > 0 && prev[j - 1] < best) best = prev[j - 1];
      }
      if (best == kInf) continue;
      curr[j] = best + frame_distance(ai, b + j * dim, dim);
      if (curr[j] < row_min) row_min = curr[j];
    }
    // Any warping path crosses every row, so the row minimum bounds the
    // final distance from below.
    if (row_min > abandon_above) return kInf;
    std::swap(prev, curr);
  }
  return prev[len_b - 1];
}

double dtw_distance(const std::vector<double>& a, const std::vector<double>& b, size_t dim,
                    std::optional<size_t> band) {
  if (dim == 0 || a.size() % dim != 0 || b.size() % dim != 0)
    fail(ErrorCode::DimensionMismatch, "sequence size not a multiple of the dimension");
  std::vector<float> fa(a.begin(), a.end()), fb(b.begin(), b.end());
  return dtw_distance(fa.data(), a.size() / dim, fb.data(), b.size() / dim, dim, band);
}

KnnPrediction knn_predict(const FeatureTensor& train, const std::vector<int>& train_labels,
                          const float* query, size_t query_len, const KnnConfig& config) {
  if (train.n == 0) fail(ErrorCode::EmptyTrainingSet, "no training samples");
  if (train_labels.size() != train.n)
    fail(ErrorCode::ShapeMismatch, "label count does not match training tensor");
  if (train.n < config.k)
    fail(ErrorCode::EmptyTrainingSet, "training set smaller than k");

  const size_t k = config.k;
  // (distance, train index) of the current k best; kth value drives the
  // early-abandon threshold. Candidates abandoned against the running
  // threshold have a true distance strictly above the final kth best, so
  // the selected set does not depend on scan order.
  std::vector<std::pair<double, size_t>> best;
  best.reserve(k + 1);
  double threshold = std::numeric_limits<double>::infinity();

  for (size_t i = 0; i < train.n; ++i) {
    double dist = dtw_distance(&train.data[i * train.l * train.d], train.l, query, query_len,
                               train.d, config.band, threshold);
    if (std::isinf(dist)) continue;
    best.emplace_back(dist, i);
    std::sort(best.begin(), best.end());
    if (best.size() > k) best.pop_back();
    if (best.size() == k) threshold = best.back().first;
  }

  std::map<int, size_t> votes;
  std::map<int, double> summed;
  for (const auto& [dist, idx] : best) {
    votes[train_labels[idx]] += 1;
    summed[train_labels[idx]] += dist;
  }

  // Majority vote; ties -> smaller summed distance -> smaller class code.
  int winner = -1;
  size_t winner_votes = 0;
  double winner_sum = std::numeric_limits<double>::infinity();
  for (const auto& [label, count] : votes) {
    double sum = summed[label];
    bool better = count > winner_votes || (count == winner_votes && sum < winner_sum);
    if (better) {
      winner = label;
      winner_votes = count;
      winner_sum = sum;
    }
  }

  KnnPrediction prediction;
  prediction.label = winner;
  prediction.neighbors = best;
  for (const auto& [label, count] : votes) prediction.votes.emplace_back(label, count);
  prediction.top_vote_fraction =
      best.empty() ? 0.0 : static_cast<double>(winner_votes) / static_cast<double>(best.size());
  return prediction;
}

}  // namespace provts
