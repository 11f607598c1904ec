#include "provts/evaluate.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "provts/transform.hpp"

namespace provts {

using nlohmann::json;

size_t ConfusionMatrix::total() const {
  size_t sum = 0;
  for (size_t c : counts) sum += c;
  return sum;
}

double ConfusionMatrix::accuracy() const {
  size_t n = total();
  if (n == 0) return 0.0;
  size_t diag = 0;
  for (size_t i = 0; i < classes.size(); ++i) diag += at(i, i);
  return static_cast<double>(diag) / static_cast<double>(n);
}

double ConfusionMatrix::macro_f1() const {
  if (classes.empty()) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < classes.size(); ++i) {
    size_t tp = at(i, i), fp = 0, fn = 0;
    for (size_t j = 0; j < classes.size(); ++j) {
      if (j == i) continue;
      fp += at(j, i);
      fn += at(i, j);
    }
    double denom = static_cast<double>(2 * tp + fp + fn);
    sum += denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
  }
  return sum / static_cast<double>(classes.size());
}

std::string ConfusionMatrix::to_csv() const {
  std::ostringstream out;
  out << "truth\\predicted";
  for (int c : classes) out << ',' << c;
  out << '\n';
  for (size_t i = 0; i < classes.size(); ++i) {
    out << classes[i];
    for (size_t j = 0; j < classes.size(); ++j) out << ',' << at(i, j);
    out << '\n';
  }
  return out.str();
}

ConfusionMatrix confusion_matrix(const std::vector<int>& truth, const std::vector<int>& predicted,
                                 const std::vector<int>& classes) {
  if (truth.size() != predicted.size())
    fail(ErrorCode::ShapeMismatch, "truth and prediction lengths differ");
  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts.assign(classes.size() * classes.size(), 0);
  std::map<int, size_t> index;
  for (size_t i = 0; i < classes.size(); ++i) index[classes[i]] = i;
  for (size_t i = 0; i < truth.size(); ++i) {
    auto ti = index.find(truth[i]);
    auto pi = index.find(predicted[i]);
    if (ti == index.end())
      fail(ErrorCode::UnknownClass, "truth label " + std::to_string(truth[i]));
    if (pi == index.end())
      fail(ErrorCode::UnknownClass, "predicted label " + std::to_string(predicted[i]));
    ++cm.counts[ti->second * classes.size() + pi->second];
  }
  return cm;
}

std::string EvalReport::to_json() const {
  json doc;
  doc["scale"] = to_string(scale);
  doc["model"] = model_id;
  doc["environment"] = to_string(environment);
  json folds_json = json::array();
  for (const auto& f : folds)
    folds_json.push_back({{"accuracy", f.accuracy}, {"macro_f1", f.macro_f1}});
  doc["folds"] = folds_json;
  doc["mean_accuracy"] = mean_accuracy;
  doc["mean_macro_f1"] = mean_macro_f1;
  doc["pooled_accuracy"] = pooled_accuracy;
  doc["pooled_macro_f1"] = pooled_macro_f1;
  doc["classes"] = confusion.classes;
  json rows = json::array();
  for (size_t i = 0; i < confusion.classes.size(); ++i) {
    json row = json::array();
    for (size_t j = 0; j < confusion.classes.size(); ++j) row.push_back(confusion.at(i, j));
    rows.push_back(row);
  }
  doc["confusion"] = rows;
  return doc.dump(2) + "\n";
}

std::vector<size_t> stratified_fold_assignment(const std::vector<int>& labels, size_t k,
                                               uint64_t seed) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "need at least 2 folds");
  std::map<int, std::vector<size_t>> by_class;
  for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  std::vector<size_t> fold_of(labels.size(), 0);
  Rng rng(derive_seed(seed, 0xF01D));
  size_t offset = 0;  // staggered start balances fold sizes across classes
  for (auto& [label, indices] : by_class) {
    if (indices.size() < k)
      fail(ErrorCode::ClassTooSmall, "class " + std::to_string(label) + " has " +
                                         std::to_string(indices.size()) + " samples, need >= " +
                                         std::to_string(k));
    rng.shuffle(indices);
    for (size_t r = 0; r < indices.size(); ++r) fold_of[indices[r]] = (offset + r) % k;
    offset += indices.size();
  }
  return fold_of;
}

CvOutput cross_validate(const FeatureTensor& dataset, const ClassifierFactory& factory,
                        Scale scale, size_t k, uint64_t seed, const std::string& model_id) {
  const auto& labels = dataset.labels(scale == Scale::Space);
  if (labels.size() != dataset.n) fail(ErrorCode::ShapeMismatch, "labels missing");
  for (int l : labels)
    if (l < 0) fail(ErrorCode::InvalidArgument, "dataset contains unlabeled samples");

  std::set<int> class_set(labels.begin(), labels.end());
  std::vector<int> classes(class_set.begin(), class_set.end());
  auto fold_of = stratified_fold_assignment(labels, k, seed);

  CvOutput out;
  out.class_codes = classes;
  out.report.scale = scale;
  out.report.model_id = model_id;
  out.report.environment = dataset.environment;
  out.report.confusion.classes = classes;
  out.report.confusion.counts.assign(classes.size() * classes.size(), 0);
  out.oof_predictions.assign(dataset.n, -1);
  out.oof_scores.assign(dataset.n, {});

  for (size_t fold = 0; fold < k; ++fold) {
    std::vector<size_t> train_ix, test_ix;
    for (size_t i = 0; i < dataset.n; ++i)
      (fold_of[i] == fold ? test_ix : train_ix).push_back(i);

    FeatureTensor train = dataset.select_samples(train_ix);
    FeatureTensor test = dataset.select_samples(test_ix);
    auto params = fit_normalizer(train);
    apply_normalizer(train, params);
    apply_normalizer(test, params);

    auto classifier = factory();
    classifier->fit(train, train.labels(scale == Scale::Space));
    auto prediction = classifier->predict(test);

    std::vector<int> truth;
    for (size_t i : test_ix) truth.push_back(labels[i]);
    auto cm = confusion_matrix(truth, prediction.labels, classes);
    out.report.folds.push_back({cm.accuracy(), cm.macro_f1()});
    for (size_t c = 0; c < cm.counts.size(); ++c) out.report.confusion.counts[c] += cm.counts[c];

    // Fold classifiers may expose a class subset; remap scores onto the
    // dataset-wide class list.
    const auto& fold_classes = classifier->classes();
    for (size_t t = 0; t < test_ix.size(); ++t) {
      out.oof_predictions[test_ix[t]] = prediction.labels[t];
      std::vector<double> full(classes.size(), 0.0);
      for (size_t c = 0; c < fold_classes.size(); ++c) {
        size_t idx = static_cast<size_t>(
            std::lower_bound(classes.begin(), classes.end(), fold_classes[c]) - classes.begin());
        full[idx] = prediction.scores[t][c];
      }
      out.oof_scores[test_ix[t]] = std::move(full);
    }
  }

  for (const auto& f : out.report.folds) {
    out.report.mean_accuracy += f.accuracy;
    out.report.mean_macro_f1 += f.macro_f1;
  }
  out.report.mean_accuracy /= static_cast<double>(out.report.folds.size());
  out.report.mean_macro_f1 /= static_cast<double>(out.report.folds.size());
  out.report.pooled_accuracy = out.report.confusion.accuracy();
  out.report.pooled_macro_f1 = out.report.confusion.macro_f1();
  return out;
}

EvalReport evaluate_on(const Classifier& classifier, const FeatureTensor& test, Scale scale,
                       const std::string& model_id) {
  const auto& truth = test.labels(scale == Scale::Space);
  for (int l : truth)
    if (l < 0) fail(ErrorCode::InvalidArgument, "test set contains unlabeled samples");
  auto prediction = classifier.predict(test);

  std::set<int> class_set(truth.begin(), truth.end());
  for (int c : classifier.classes()) class_set.insert(c);
  std::vector<int> classes(class_set.begin(), class_set.end());

  EvalReport report;
  report.scale = scale;
  report.model_id = model_id;
  report.environment = test.environment;
  report.confusion = confusion_matrix(truth, prediction.labels, classes);
  report.folds.push_back({report.confusion.accuracy(), report.confusion.macro_f1()});
  report.mean_accuracy = report.folds[0].accuracy;
  report.mean_macro_f1 = report.folds[0].macro_f1;
  report.pooled_accuracy = report.mean_accuracy;
  report.pooled_macro_f1 = report.mean_macro_f1;
  return report;
}

}  // namespace provts
