#pragma once

#include <string>
#include <vector>

#include "provts/classifier.hpp"
#include "provts/evaluate.hpp"
#include "provts/tensor.hpp"

namespace provts {

/// Copy of the tensor with one raw feature's whole per-sample series moved
/// between samples by `perm` (block permutation across samples; all
/// derived columns of the feature move together).
FeatureTensor permute_feature(const FeatureTensor& tensor, size_t raw_index,
                              const std::vector<size_t>& perm);

/// Derived-column indices of every raw feature belonging to the group.
std::vector<size_t> group_columns(const FeatureTensor& tensor, FeatureGroup group);

struct GroupImportance {
  FeatureGroup group = FeatureGroup::Interaction;
  double full_accuracy = 0.0;
  double reduced_accuracy = 0.0;
  double full_macro_f1 = 0.0;
  double reduced_macro_f1 = 0.0;

  double delta_accuracy() const { return full_accuracy - reduced_accuracy; }
  double delta_macro_f1() const { return full_macro_f1 - reduced_macro_f1; }
};

/// Retrains without the group's features and reports the score drop
/// against the full-feature cross-validation (same folds).
GroupImportance leave_group_out(const FeatureTensor& dataset, const ClassifierFactory& factory,
                                Scale scale, FeatureGroup group, size_t k, uint64_t seed,
                                const EvalReport* full_report = nullptr);

/// Retrain: models are trained afresh per fold of a stratified CV (on
/// unpermuted data) and every sample is scored out-of-fold by its fold
/// model, on the original and on the permuted input. Inference: one
/// already-fitted model scores the whole dataset.
enum class PermFitMode { Retrain, Inference };

struct PermFitOptions {
  size_t repeats = 100;
  PermFitMode mode = PermFitMode::Retrain;
  size_t cv_folds = 5;
};

/// Mean squared difference between model score vectors on the original and
/// feature-permuted dataset, averaged over repeats. The permutation moves
/// one raw feature across samples; everything else (models, fold split,
/// normalization) stays fixed, so an identity permutation scores 0.
double permfit_score(const FeatureTensor& dataset, const ClassifierFactory& factory,
                     const Classifier* fitted, Scale scale, const std::string& feature,
                     const PermFitOptions& options, uint64_t seed);

struct PermFitEntry {
  std::string feature;
  double score = 0.0;
  size_t rank = 0;  // 1 = most important
};

/// Scores each feature and ranks them descending (Table-style listing).
std::vector<PermFitEntry> permfit_ranking(const FeatureTensor& dataset,
                                          const ClassifierFactory& factory,
                                          const Classifier* fitted, Scale scale,
                                          const std::vector<std::string>& features,
                                          const PermFitOptions& options, uint64_t seed);

std::string importance_report_json(const std::vector<GroupImportance>& groups,
                                   const std::vector<PermFitEntry>& permfit);
std::string importance_report_csv(const std::vector<GroupImportance>& groups,
                                  const std::vector<PermFitEntry>& permfit);

}  // namespace provts
