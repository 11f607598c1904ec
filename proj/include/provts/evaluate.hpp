#pragma once

#include <functional>
#include <string>
#include <vector>

#include "provts/classifier.hpp"
#include "provts/tensor.hpp"

namespace provts {

struct ConfusionMatrix {
  std::vector<int> classes;     // ascending codes
  std::vector<size_t> counts;   // classes x classes, rows = truth

  size_t at(size_t truth, size_t predicted) const {
    return counts[truth * classes.size() + predicted];
  }
  size_t total() const;
  double accuracy() const;
  /// Unweighted mean of per-class F1; classes with no support and no
  /// predictions contribute 0.
  double macro_f1() const;

  std::string to_csv() const;
};

/// CM[i][j] = count(truth == classes[i] && predicted == classes[j]);
/// UnknownClass if a label is outside the class list.
ConfusionMatrix confusion_matrix(const std::vector<int>& truth, const std::vector<int>& predicted,
                                 const std::vector<int>& classes);

struct FoldMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

struct EvalReport {
  Scale scale = Scale::Space;
  std::string model_id;
  Environment environment = Environment::Immersive;
  std::vector<FoldMetrics> folds;
  double mean_accuracy = 0.0;  // unweighted mean over folds
  double mean_macro_f1 = 0.0;
  ConfusionMatrix confusion;   // summed over test folds
  // Recomputable from `confusion` exactly; differs from the fold means
  // only when fold sizes differ.
  double pooled_accuracy = 0.0;
  double pooled_macro_f1 = 0.0;

  std::string to_json() const;
};

/// Per-class round-robin assignment after a seeded shuffle; fold class
/// proportions stay within one sample of the global proportions.
std::vector<size_t> stratified_fold_assignment(const std::vector<int>& labels, size_t k,
                                               uint64_t seed);

using ClassifierFactory = std::function<std::unique_ptr<Classifier>()>;

struct CvOutput {
  EvalReport report;
  std::vector<int> oof_predictions;                // per sample, out of fold
  std::vector<std::vector<double>> oof_scores;     // per sample, per class
  std::vector<int> class_codes;
};

/// Stratified k-fold cross-validation. Normalization is refitted on every
/// training fold and applied (with clamping) to its test fold, so the
/// input tensor may be raw or globally normalized. ClassTooSmall if any
/// class has fewer than k samples.
CvOutput cross_validate(const FeatureTensor& dataset, const ClassifierFactory& factory,
                        Scale scale, size_t k, uint64_t seed, const std::string& model_id = "");

/// Holdout evaluation of an already-fitted classifier.
EvalReport evaluate_on(const Classifier& classifier, const FeatureTensor& test, Scale scale,
                       const std::string& model_id = "");

}  // namespace provts
