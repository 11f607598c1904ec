#include "provts/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

namespace provts {

using nlohmann::json;
namespace fs = std::filesystem;

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "knn") return ModelKind::Knn;
  if (name == "cnn") return ModelKind::Cnn;
  if (name == "rocket") return ModelKind::Rocket;
  fail(ErrorCode::InvalidArgument, "unknown model '" + name + "'");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Knn: return "knn";
    case ModelKind::Cnn: return "cnn";
    case ModelKind::Rocket: return "rocket";
  }
  return "?";
}

Scale scale_from_string(const std::string& name) {
  if (name == "space") return Scale::Space;
  if (name == "task") return Scale::Task;
  fail(ErrorCode::InvalidArgument, "unknown scale '" + name + "'");
}

std::string to_string(Scale scale) { return scale == Scale::Space ? "space" : "task"; }

std::string ClassifierConfig::to_json() const {
  json doc;
  doc["kind"] = to_string(kind);
  doc["knn"] = json::parse(knn.to_json());
  doc["cnn"] = json::parse(cnn.to_json());
  doc["rocket"] = json::parse(rocket.to_json());
  doc["ridge_alpha_grid"] = ridge.alpha_grid;
  doc["ridge_cv_folds"] = ridge.cv_folds;
  doc["seed"] = seed;
  return doc.dump(2) + "\n";
}

ClassifierConfig ClassifierConfig::from_json(const std::string& text) {
  json doc = json::parse(text);
  ClassifierConfig config;
  if (doc.contains("kind")) config.kind = model_kind_from_string(doc.at("kind").get<std::string>());
  if (doc.contains("knn")) config.knn = KnnConfig::from_json(doc.at("knn").dump());
  if (doc.contains("cnn")) config.cnn = CnnConfig::from_json(doc.at("cnn").dump());
  if (doc.contains("rocket")) config.rocket = RocketConfig::from_json(doc.at("rocket").dump());
  if (doc.contains("ridge_alpha_grid"))
    config.ridge.alpha_grid = doc.at("ridge_alpha_grid").get<std::vector<double>>();
  if (doc.contains("ridge_cv_folds")) config.ridge.cv_folds = doc.at("ridge_cv_folds").get<size_t>();
  if (doc.contains("seed")) config.seed = doc.at("seed").get<uint64_t>();
  return config;
}

namespace {

std::vector<int> sorted_classes(const std::vector<int>& labels) {
  std::set<int> s;
  for (int l : labels) {
    if (l < 0) fail(ErrorCode::InvalidArgument, "training labels must be non-negative");
    s.insert(l);
  }
  if (s.empty()) fail(ErrorCode::EmptyTrainingSet, "no labels");
  return {s.begin(), s.end()};
}

class KnnClassifier : public Classifier {
 public:
  KnnClassifier(KnnConfig config, int jobs) : config_(config), jobs_(jobs) {}

  void fit(const FeatureTensor& train, const std::vector<int>& labels) override {
    if (train.n == 0) fail(ErrorCode::EmptyTrainingSet, "empty training tensor");
    train_ = train;
    labels_ = labels;
    classes_ = sorted_classes(labels);
  }

  PredictionBatch predict(const FeatureTensor& data) const override {
    if (data.d != train_.d) fail(ErrorCode::ShapeMismatch, "query width differs from training");
    PredictionBatch out;
    out.labels.resize(data.n);
    out.scores.resize(data.n);
    out.confidence.resize(data.n);
    parallel_for(data.n, jobs_, [&](size_t i) {
      auto p = knn_predict(train_, labels_, &data.data[i * data.l * data.d], data.l, config_);
      out.labels[i] = p.label;
      out.confidence[i] = p.top_vote_fraction;
      std::vector<double> score(classes_.size(), 0.0);
      for (const auto& [code, count] : p.votes) {
        size_t idx = static_cast<size_t>(
            std::lower_bound(classes_.begin(), classes_.end(), code) - classes_.begin());
        score[idx] = static_cast<double>(count) / static_cast<double>(config_.k);
      }
      out.scores[i] = std::move(score);
    });
    return out;
  }

  const std::vector<int>& classes() const override { return classes_; }
  ModelKind kind() const override { return ModelKind::Knn; }

  const FeatureTensor& train_tensor() const { return train_; }
  const std::vector<int>& train_labels() const { return labels_; }
  const KnnConfig& config() const { return config_; }

 private:
  KnnConfig config_;
  int jobs_;
  FeatureTensor train_;
  std::vector<int> labels_;
  std::vector<int> classes_;
};

class CnnClassifier : public Classifier {
 public:
  CnnClassifier(CnnConfig config, uint64_t seed, int jobs)
      : config_(config), seed_(seed), jobs_(jobs) {}

  void fit(const FeatureTensor& train, const std::vector<int>& labels) override {
    model_ = train_cnn(train, labels, config_, seed_, jobs_);
  }

  PredictionBatch predict(const FeatureTensor& data) const override {
    if (data.d != model_.net.input_dim || data.l != model_.net.input_len)
      fail(ErrorCode::ShapeMismatch, "tensor shape differs from the trained network");
    PredictionBatch out;
    out.labels.resize(data.n);
    out.scores.resize(data.n);
    out.confidence.resize(data.n);
    parallel_for(data.n, jobs_, [&](size_t i) {
      auto probs = model_.scores(&data.data[i * data.l * data.d]);
      size_t best = 0;
      for (size_t k = 1; k < probs.size(); ++k)
        if (probs[k] > probs[best]) best = k;
      out.labels[i] = model_.classes[best];
      out.confidence[i] = probs[best];
      out.scores[i] = std::move(probs);
    });
    return out;
  }

  const std::vector<int>& classes() const override { return model_.classes; }
  ModelKind kind() const override { return ModelKind::Cnn; }

  CnnModel& model() { return model_; }
  const CnnModel& model() const { return model_; }

 private:
  CnnConfig config_;
  uint64_t seed_;
  int jobs_;
  CnnModel model_;
};

class RocketClassifier : public Classifier {
 public:
  RocketClassifier(RocketConfig config, RidgeConfig ridge, uint64_t seed, int jobs)
      : config_(config), ridge_config_(ridge), seed_(seed), jobs_(jobs) {}

  void fit(const FeatureTensor& train, const std::vector<int>& labels) override {
    if (train.n == 0) fail(ErrorCode::EmptyTrainingSet, "empty training tensor");
    kernels_ = sample_kernels(train.l, train.d, config_, seed_);
    auto features = apply_kernels(train, kernels_, jobs_);
    ridge_ = fit_ridge(features, train.n, kernels_.size() * 2, labels, ridge_config_, seed_);
  }

  PredictionBatch predict(const FeatureTensor& data) const override {
    auto features = apply_kernels(data, kernels_, jobs_);
    const size_t p = kernels_.size() * 2;
    PredictionBatch out;
    out.labels.resize(data.n);
    out.scores.resize(data.n);
    out.confidence.resize(data.n);
    for (size_t i = 0; i < data.n; ++i) {
      auto score = ridge_.scores(&features[i * p]);
      size_t best = 0;
      for (size_t k = 1; k < score.size(); ++k)
        if (score[k] > score[best]) best = k;
      double runner_up = -std::numeric_limits<double>::infinity();
      for (size_t k = 0; k < score.size(); ++k)
        if (k != best && score[k] > runner_up) runner_up = score[k];
      double margin = score.size() > 1 ? score[best] - runner_up : 1.0;
      out.labels[i] = ridge_.classes[best];
      out.confidence[i] = 1.0 / (1.0 + std::exp(-margin));
      out.scores[i] = std::move(score);
    }
    return out;
  }

  const std::vector<int>& classes() const override { return ridge_.classes; }
  ModelKind kind() const override { return ModelKind::Rocket; }

  std::vector<RocketKernel>& kernels() { return kernels_; }
  const std::vector<RocketKernel>& kernels() const { return kernels_; }
  RidgeModel& ridge() { return ridge_; }
  const RidgeModel& ridge() const { return ridge_; }

 private:
  RocketConfig config_;
  RidgeConfig ridge_config_;
  uint64_t seed_;
  int jobs_;
  std::vector<RocketKernel> kernels_;
  RidgeModel ridge_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

template <typename T>
void append_vec(std::string& out, const std::vector<T>& values) {
  uint64_t count = values.size();
  out.append(reinterpret_cast<const char*>(&count), 8);
  out.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(T));
}

template <typename T>
std::vector<T> read_vec(const std::string& bytes, size_t& pos) {
  if (pos + 8 > bytes.size()) fail(ErrorCode::ParseError, "truncated weight blob");
  uint64_t count;
  std::memcpy(&count, bytes.data() + pos, 8);
  pos += 8;
  if (pos + count * sizeof(T) > bytes.size()) fail(ErrorCode::ParseError, "truncated weight blob");
  std::vector<T> values(count);
  std::memcpy(values.data(), bytes.data() + pos, count * sizeof(T));
  pos += count * sizeof(T);
  return values;
}

}  // namespace

std::unique_ptr<Classifier> make_classifier(const ClassifierConfig& config) {
  switch (config.kind) {
    case ModelKind::Knn: return std::make_unique<KnnClassifier>(config.knn, config.jobs);
    case ModelKind::Cnn:
      return std::make_unique<CnnClassifier>(config.cnn, config.seed, config.jobs);
    case ModelKind::Rocket:
      return std::make_unique<RocketClassifier>(config.rocket, config.ridge, config.seed,
                                                config.jobs);
  }
  fail(ErrorCode::InvalidArgument, "bad model kind");
}

TrainedModel train_model(const FeatureTensor& train, Scale scale, const ClassifierConfig& config) {
  TrainedModel model;
  model.config = config;
  model.scale = scale;
  model.environment = train.environment;
  model.schema_json = train.schema_json;
  model.transform.segments = train.l;
  model.transform.stats.clear();
  for (const auto& s : train.stats) model.transform.stats.push_back(stat_from_string(s));
  model.normalization = train.normalization;
  model.classifier = make_classifier(config);
  const auto& labels = train.labels(scale == Scale::Space);
  model.classifier->fit(train, labels);
  return model;
}

void TrainedModel::save(const std::string& dir, const std::string& knn_tensor_ref) const {
  fs::create_directories(dir);
  json doc;
  doc["kind"] = to_string(config.kind);
  doc["scale"] = to_string(scale);
  doc["environment"] = to_string(environment);
  doc["schema"] = json::parse(schema_json);
  doc["schema_hash"] = schema_hash();
  doc["config"] = json::parse(config.to_json());
  doc["segments"] = transform.segments;
  json stats = json::array();
  for (Stat s : transform.stats) stats.push_back(to_string(s));
  doc["stats"] = stats;
  doc["normalization"] = {{"min", normalization.min}, {"max", normalization.max}};
  doc["classes"] = classifier->classes();

  std::string blob;
  switch (config.kind) {
    case ModelKind::Knn: {
      if (knn_tensor_ref.empty())
        fail(ErrorCode::InvalidArgument, "kNN models need a training tensor reference");
      doc["train_tensor"] = knn_tensor_ref;
      break;
    }
    case ModelKind::Cnn: {
      const auto& cnn = static_cast<const CnnClassifier&>(*classifier).model();
      doc["net"] = {{"input_len", cnn.net.input_len},
                    {"input_dim", cnn.net.input_dim},
                    {"filters", cnn.net.filters},
                    {"filter_length", cnn.net.filter_length},
                    {"n_classes", cnn.net.n_classes}};
      doc["epoch_loss"] = cnn.epoch_loss;
      blob = cnn.net.params_to_bytes();
      break;
    }
    case ModelKind::Rocket: {
      const auto& rocket = static_cast<const RocketClassifier&>(*classifier);
      doc["alpha"] = rocket.ridge().alpha;
      blob = kernels_to_bytes(rocket.kernels());
      append_vec(blob, rocket.ridge().feature_mean);
      append_vec(blob, rocket.ridge().feature_std);
      append_vec(blob, rocket.ridge().beta);
      append_vec(blob, rocket.ridge().intercept);
      break;
    }
  }
  write_file(dir + "/model.json", doc.dump(2) + "\n");
  if (!blob.empty()) write_file(dir + "/model.weights.bin", blob);
}

TrainedModel TrainedModel::load(const std::string& dir) {
  json doc = json::parse(read_file(dir + "/model.json"));
  TrainedModel model;
  model.config = ClassifierConfig::from_json(doc.at("config").dump());
  model.config.kind = model_kind_from_string(doc.at("kind").get<std::string>());
  model.scale = scale_from_string(doc.at("scale").get<std::string>());
  model.environment = environment_from_string(doc.at("environment").get<std::string>());
  model.schema_json = doc.at("schema").dump(2) + "\n";
  model.transform.segments = doc.at("segments").get<size_t>();
  model.transform.stats.clear();
  for (const auto& s : doc.at("stats")) model.transform.stats.push_back(stat_from_string(s));
  model.normalization.min = doc.at("normalization").at("min").get<std::vector<double>>();
  model.normalization.max = doc.at("normalization").at("max").get<std::vector<double>>();
  std::vector<int> classes = doc.at("classes").get<std::vector<int>>();

  model.classifier = make_classifier(model.config);
  switch (model.config.kind) {
    case ModelKind::Knn: {
      std::string ref = doc.at("train_tensor").get<std::string>();
      std::string resolved = ref;
      if (!fs::exists(resolved + ".meta.json")) resolved = dir + "/" + ref;
      FeatureTensor train = load_tensor(resolved);
      auto& knn = static_cast<KnnClassifier&>(*model.classifier);
      knn.fit(train, train.labels(model.scale == Scale::Space));
      break;
    }
    case ModelKind::Cnn: {
      auto& cnn = static_cast<CnnClassifier&>(*model.classifier).model();
      cnn.config = model.config.cnn;
      cnn.classes = classes;
      const auto& net = doc.at("net");
      cnn.net.init_shapes(net.at("input_len").get<size_t>(), net.at("input_dim").get<size_t>(),
                          net.at("filters").get<size_t>(), net.at("filter_length").get<size_t>(),
                          net.at("n_classes").get<size_t>());
      cnn.net.params_from_bytes(read_file(dir + "/model.weights.bin"));
      if (doc.contains("epoch_loss"))
        cnn.epoch_loss = doc.at("epoch_loss").get<std::vector<double>>();
      break;
    }
    case ModelKind::Rocket: {
      auto& rocket = static_cast<RocketClassifier&>(*model.classifier);
      std::string blob = read_file(dir + "/model.weights.bin");
      rocket.kernels() = kernels_from_bytes(blob);
      size_t pos = kernels_to_bytes(rocket.kernels()).size();
      rocket.ridge().feature_mean = read_vec<double>(blob, pos);
      rocket.ridge().feature_std = read_vec<double>(blob, pos);
      rocket.ridge().beta = read_vec<double>(blob, pos);
      rocket.ridge().intercept = read_vec<double>(blob, pos);
      rocket.ridge().classes = classes;
      rocket.ridge().alpha = doc.at("alpha").get<double>();
      break;
    }
  }
  return model;
}

}  // namespace provts
