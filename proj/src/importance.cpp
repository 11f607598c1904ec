#include "provts/importance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace provts {

using nlohmann::json;

FeatureTensor permute_feature(const FeatureTensor& tensor, size_t raw_index,
                              const std::vector<size_t>& perm) {
  if (raw_index >= tensor.raw_dimension())
    fail(ErrorCode::UnknownFeature, "raw feature index out of range");
  if (perm.size() != tensor.n) fail(ErrorCode::ShapeMismatch, "permutation size mismatch");
  FeatureTensor out = tensor;
  auto columns = tensor.columns_of_raw(raw_index);
  for (size_t i = 0; i < tensor.n; ++i) {
    size_t src = perm[i];
    for (size_t s = 0; s < tensor.l; ++s)
      for (size_t col : columns) out.at(i, s, col) = tensor.at(src, s, col);
  }
  return out;
}

std::vector<size_t> group_columns(const FeatureTensor& tensor, FeatureGroup group) {
  FeatureSchema schema = FeatureSchema::from_json(tensor.schema_json);
  std::vector<size_t> columns;
  for (size_t raw : schema.group_indices(group))
    for (size_t col : tensor.columns_of_raw(raw)) columns.push_back(col);
  std::sort(columns.begin(), columns.end());
  return columns;
}

GroupImportance leave_group_out(const FeatureTensor& dataset, const ClassifierFactory& factory,
                                Scale scale, FeatureGroup group, size_t k, uint64_t seed,
                                const EvalReport* full_report) {
  auto drop = group_columns(dataset, group);
  if (drop.empty())
    fail(ErrorCode::InvalidArgument,
         "group '" + to_string(group) + "' has no features in this dataset");
  if (drop.size() == dataset.d)
    fail(ErrorCode::EmptyFeatureSet, "leaving the group out removes every feature");

  std::vector<size_t> keep;
  for (size_t c = 0; c < dataset.d; ++c)
    if (!std::binary_search(drop.begin(), drop.end(), c)) keep.push_back(c);

  GroupImportance importance;
  importance.group = group;

  EvalReport full;
  if (full_report)
    full = *full_report;
  else
    full = cross_validate(dataset, factory, scale, k, seed).report;
  importance.full_accuracy = full.mean_accuracy;
  importance.full_macro_f1 = full.mean_macro_f1;

  FeatureTensor reduced = dataset.select_columns(keep);
  auto report = cross_validate(reduced, factory, scale, k, seed).report;
  importance.reduced_accuracy = report.mean_accuracy;
  importance.reduced_macro_f1 = report.mean_macro_f1;
  return importance;
}

namespace {

double mean_squared_difference(const std::vector<std::vector<double>>& a,
                               const std::vector<std::vector<double>>& b) {
  double sum = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t c = 0; c < a[i].size(); ++c) {
      double diff = a[i][c] - b[i][c];
      sum += diff * diff;
      ++count;
    }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace

namespace {

/// Scoring machinery shared by every feature: either one fitted model, or
/// per-fold models trained once on unpermuted data whose held-out slices
/// tile the dataset.
struct PermFitScorer {
  const Classifier* single = nullptr;
  std::vector<std::unique_ptr<Classifier>> fold_models;
  std::vector<NormalizationParams> fold_params;
  std::vector<std::vector<size_t>> fold_test;
  size_t n_classes = 0;

  std::vector<std::vector<double>> score(const FeatureTensor& tensor) const {
    if (single) return single->predict(tensor).scores;
    std::vector<std::vector<double>> out(tensor.n);
    for (size_t fold = 0; fold < fold_models.size(); ++fold) {
      FeatureTensor test = tensor.select_samples(fold_test[fold]);
      apply_normalizer(test, fold_params[fold]);
      auto prediction = fold_models[fold]->predict(test);
      for (size_t t = 0; t < fold_test[fold].size(); ++t)
        out[fold_test[fold][t]] = std::move(prediction.scores[t]);
    }
    return out;
  }
};

PermFitScorer make_scorer(const FeatureTensor& dataset, const ClassifierFactory& factory,
                          const Classifier* fitted, Scale scale, const PermFitOptions& options,
                          uint64_t seed) {
  PermFitScorer scorer;
  if (options.mode == PermFitMode::Inference) {
    if (!fitted) fail(ErrorCode::InvalidArgument, "inference mode needs a fitted classifier");
    scorer.single = fitted;
    return scorer;
  }
  const auto& labels = dataset.labels(scale == Scale::Space);
  auto fold_of = stratified_fold_assignment(labels, options.cv_folds, seed);
  scorer.fold_test.resize(options.cv_folds);
  for (size_t fold = 0; fold < options.cv_folds; ++fold) {
    std::vector<size_t> train_ix;
    for (size_t i = 0; i < dataset.n; ++i)
      (fold_of[i] == fold ? scorer.fold_test[fold] : train_ix).push_back(i);
    FeatureTensor train = dataset.select_samples(train_ix);
    auto params = fit_normalizer(train);
    apply_normalizer(train, params);
    auto model = factory();
    model->fit(train, train.labels(scale == Scale::Space));
    scorer.fold_params.push_back(std::move(params));
    scorer.fold_models.push_back(std::move(model));
  }
  return scorer;
}

double permfit_score_against(const FeatureTensor& dataset, const PermFitScorer& scorer,
                             const std::string& feature, const PermFitOptions& options,
                             uint64_t seed, const std::vector<std::vector<double>>& baseline) {
  size_t raw_index = dataset.raw_dimension();
  for (size_t i = 0; i < dataset.raw_dimension(); ++i)
    if (dataset.raw_features[i] == feature) raw_index = i;
  if (raw_index == dataset.raw_dimension())
    fail(ErrorCode::UnknownFeature, "feature '" + feature + "' not in dataset");
  if (options.repeats < 1) fail(ErrorCode::InvalidArgument, "repeats must be >= 1");

  uint64_t feature_seed = derive_seed(seed, 0x9E24F17ULL + raw_index);
  double total = 0.0;
  std::vector<size_t> perm(dataset.n);
  for (size_t repeat = 0; repeat < options.repeats; ++repeat) {
    Rng rng(derive_seed(feature_seed, repeat));
    for (size_t i = 0; i < dataset.n; ++i) perm[i] = i;
    rng.shuffle(perm);
    FeatureTensor permuted = permute_feature(dataset, raw_index, perm);
    total += mean_squared_difference(baseline, scorer.score(permuted));
  }
  return total / static_cast<double>(options.repeats);
}

}  // namespace

double permfit_score(const FeatureTensor& dataset, const ClassifierFactory& factory,
                     const Classifier* fitted, Scale scale, const std::string& feature,
                     const PermFitOptions& options, uint64_t seed) {
  auto scorer = make_scorer(dataset, factory, fitted, scale, options, seed);
  auto baseline = scorer.score(dataset);
  return permfit_score_against(dataset, scorer, feature, options, seed, baseline);
}

std::vector<PermFitEntry> permfit_ranking(const FeatureTensor& dataset,
                                          const ClassifierFactory& factory,
                                          const Classifier* fitted, Scale scale,
                                          const std::vector<std::string>& features,
                                          const PermFitOptions& options, uint64_t seed) {
  // Fold models and the baseline are shared across features; permutation
  // streams stay feature-keyed.
  auto scorer = make_scorer(dataset, factory, fitted, scale, options, seed);
  auto baseline = scorer.score(dataset);
  std::vector<PermFitEntry> entries;
  for (const auto& feature : features) {
    PermFitEntry entry;
    entry.feature = feature;
    entry.score = permfit_score_against(dataset, scorer, feature, options, seed, baseline);
    entries.push_back(std::move(entry));
  }
  std::vector<size_t> order(entries.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return entries[a].score > entries[b].score;
  });
  std::vector<PermFitEntry> ranked;
  for (size_t r = 0; r < order.size(); ++r) {
    PermFitEntry e = entries[order[r]];
    e.rank = r + 1;
    ranked.push_back(std::move(e));
  }
  return ranked;
}

std::string importance_report_json(const std::vector<GroupImportance>& groups,
                                   const std::vector<PermFitEntry>& permfit) {
  json doc;
  json group_json = json::array();
  for (const auto& g : groups)
    group_json.push_back({{"group", to_string(g.group)},
                          {"full_accuracy", g.full_accuracy},
                          {"reduced_accuracy", g.reduced_accuracy},
                          {"delta_accuracy", g.delta_accuracy()},
                          {"full_macro_f1", g.full_macro_f1},
                          {"reduced_macro_f1", g.reduced_macro_f1},
                          {"delta_macro_f1", g.delta_macro_f1()}});
  doc["leave_group_out"] = group_json;
  json permfit_json = json::array();
  for (const auto& e : permfit)
    permfit_json.push_back({{"rank", e.rank}, {"feature", e.feature}, {"score", e.score}});
  doc["permfit"] = permfit_json;
  return doc.dump(2) + "\n";
}

std::string importance_report_csv(const std::vector<GroupImportance>& groups,
                                  const std::vector<PermFitEntry>& permfit) {
  std::ostringstream out;
  out << "kind,name,delta_accuracy,delta_macro_f1,score,rank\n";
  for (const auto& g : groups)
    out << "group," << to_string(g.group) << ',' << g.delta_accuracy() << ','
        << g.delta_macro_f1() << ",,\n";
  for (const auto& e : permfit)
    out << "feature," << e.feature << ",,," << e.score << ',' << e.rank << '\n';
  return out.str();
}

}  // namespace provts
