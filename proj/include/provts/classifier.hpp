#pragma once

#include <memory>
#include <string>
#include <vector>

#include "provts/cnn.hpp"
#include "provts/knn.hpp"
#include "provts/rocket.hpp"
#include "provts/tensor.hpp"
#include "provts/transform.hpp"

namespace provts {

enum class ModelKind { Knn, Cnn, Rocket };
enum class Scale { Space, Task };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);
Scale scale_from_string(const std::string& name);
std::string to_string(Scale scale);

struct PredictionBatch {
  std::vector<int> labels;
  std::vector<std::vector<double>> scores;  // per sample, per class (ascending codes)
  std::vector<double> confidence;           // per sample, in [0,1]
};

/// Uniform face over the three model families. fit() consumes a normalized
/// tensor plus class-code labels; scores() are softmax probabilities (CNN),
/// ridge scores (ROCKET) or k-vote fractions (kNN).
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void fit(const FeatureTensor& train, const std::vector<int>& labels) = 0;
  virtual PredictionBatch predict(const FeatureTensor& data) const = 0;
  virtual const std::vector<int>& classes() const = 0;
  virtual ModelKind kind() const = 0;
};

struct ClassifierConfig {
  ModelKind kind = ModelKind::Rocket;
  KnnConfig knn;
  CnnConfig cnn;
  RocketConfig rocket;
  RidgeConfig ridge;
  uint64_t seed = 0;
  int jobs = 1;

  std::string to_json() const;
  static ClassifierConfig from_json(const std::string& text);
};

std::unique_ptr<Classifier> make_classifier(const ClassifierConfig& config);

/// A fitted classifier plus everything needed to score a raw trace: the
/// schema, the transform settings and the training normalization.
struct TrainedModel {
  ClassifierConfig config;
  Scale scale = Scale::Space;
  Environment environment = Environment::Immersive;
  std::string schema_json;
  TransformConfig transform;
  NormalizationParams normalization;
  std::unique_ptr<Classifier> classifier;

  std::string schema_hash() const { return to_hex(fnv1a64(schema_json)); }

  /// Writes model.json (+ model.weights.bin for CNN/ROCKET) into dir.
  /// kNN models store a reference to their training tensor instead.
  void save(const std::string& dir, const std::string& knn_tensor_ref = "") const;
  static TrainedModel load(const std::string& dir);
};

TrainedModel train_model(const FeatureTensor& train, Scale scale, const ClassifierConfig& config);

}  // namespace provts
