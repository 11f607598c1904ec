#include "provts/rocket.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <set>

#include <json.hpp>

#include "provts/linalg.hpp"

namespace provts {

using nlohmann::json;

std::string RocketConfig::to_json() const {
  json doc;
  doc["n_kernels"] = n_kernels;
  return doc.dump(2) + "\n";
}

RocketConfig RocketConfig::from_json(const std::string& text) {
  json doc = json::parse(text);
  RocketConfig config;
  config.n_kernels = doc.value("n_kernels", size_t{5000});
  if (config.n_kernels < 1) fail(ErrorCode::InvalidConfig, "n_kernels must be >= 1");
  return config;
}

std::vector<RocketKernel> sample_kernels(size_t series_length, size_t n_channels,
                                         const RocketConfig& config, uint64_t seed) {
  if (series_length < 2 || n_channels < 1)
    fail(ErrorCode::InvalidConfig, "series length must be >= 2 and channels >= 1");
  static const uint32_t kLengths[3] = {7, 9, 11};
  Rng rng(derive_seed(seed, 0x60CCE7));

  std::vector<uint32_t> usable_lengths;
  for (uint32_t cand : kLengths)
    if (cand <= series_length) usable_lengths.push_back(cand);
  if (usable_lengths.empty()) usable_lengths.push_back(static_cast<uint32_t>(series_length));

  std::vector<RocketKernel> kernels(config.n_kernels);
  std::vector<uint32_t> pool(n_channels);
  for (auto& kernel : kernels) {
    kernel.length = usable_lengths[rng.uniform_index(usable_lengths.size())];

    double max_ch_exp = std::log2(static_cast<double>(n_channels));
    size_t n_ch = static_cast<size_t>(std::floor(std::exp2(rng.uniform(0.0, max_ch_exp))));
    n_ch = std::clamp<size_t>(n_ch, 1, n_channels);
    for (uint32_t c = 0; c < n_channels; ++c) pool[c] = c;
    for (size_t i = 0; i < n_ch; ++i) {  // partial Fisher-Yates
      size_t j = i + rng.uniform_index(n_channels - i);
      std::swap(pool[i], pool[j]);
    }
    kernel.channels.assign(pool.begin(), pool.begin() + static_cast<long>(n_ch));
    std::sort(kernel.channels.begin(), kernel.channels.end());

    kernel.weights.resize(n_ch * kernel.length);
    double mean = 0.0;
    for (auto& w : kernel.weights) {
      w = rng.normal();
      mean += w;
    }
    mean /= static_cast<double>(kernel.weights.size());
    for (auto& w : kernel.weights) w -= mean;

    kernel.bias = rng.uniform(-1.0, 1.0);

    double max_exp = std::log2(static_cast<double>(series_length - 1) /
                               static_cast<double>(kernel.length - 1));
    kernel.dilation =
        static_cast<uint32_t>(std::floor(std::exp2(rng.uniform(0.0, std::max(0.0, max_exp)))));
    if (kernel.dilation < 1) kernel.dilation = 1;

    bool pad = rng.uniform() < 0.5;
    kernel.padding = pad ? ((kernel.length - 1) * kernel.dilation) / 2 : 0;
  }
  return kernels;
}

namespace {

template <typename T>
void append_raw(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T read_raw(const std::string& bytes, size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) fail(ErrorCode::ParseError, "truncated kernel blob");
  T value;
  std::memcpy(&value, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

std::string kernels_to_bytes(const std::vector<RocketKernel>& kernels) {
  std::string out;
  append_raw<uint64_t>(out, 0x524f434b45543031ULL);  // "ROCKET01"
  append_raw<uint64_t>(out, kernels.size());
  for (const auto& k : kernels) {
    append_raw(out, k.length);
    append_raw(out, k.dilation);
    append_raw(out, k.padding);
    append_raw(out, k.bias);
    append_raw<uint64_t>(out, k.channels.size());
    for (uint32_t c : k.channels) append_raw(out, c);
    for (double w : k.weights) append_raw(out, w);
  }
  return out;
}

std::vector<RocketKernel> kernels_from_bytes(const std::string& bytes) {
  size_t pos = 0;
  if (read_raw<uint64_t>(bytes, pos) != 0x524f434b45543031ULL)
    fail(ErrorCode::ParseError, "bad kernel blob magic");
  uint64_t count = read_raw<uint64_t>(bytes, pos);
  std::vector<RocketKernel> kernels(count);
  for (auto& k : kernels) {
    k.length = read_raw<uint32_t>(bytes, pos);
    k.dilation = read_raw<uint32_t>(bytes, pos);
    k.padding = read_raw<uint32_t>(bytes, pos);
    k.bias = read_raw<double>(bytes, pos);
    uint64_t n_ch = read_raw<uint64_t>(bytes, pos);
    k.channels.resize(n_ch);
    for (auto& c : k.channels) c = read_raw<uint32_t>(bytes, pos);
    k.weights.resize(n_ch * k.length);
    for (auto& w : k.weights) w = read_raw<double>(bytes, pos);
  }
  return kernels;
}

void apply_kernel(const float* data, size_t length, size_t width, const RocketKernel& kernel,
                  double& ppv, double& max_out) {
  const long l = static_cast<long>(length);
  const long span = static_cast<long>(kernel.length - 1) * static_cast<long>(kernel.dilation);
  const long pad = static_cast<long>(kernel.padding);
  const long out_len = l + 2 * pad - span;
  if (out_len < 1) fail(ErrorCode::ShapeMismatch, "kernel span exceeds padded series length");

  size_t positive = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (long t = 0; t < out_len; ++t) {
    double acc = kernel.bias;
    for (size_t c = 0; c < kernel.channels.size(); ++c) {
      const float* column = data + kernel.channels[c];
      const double* w = &kernel.weights[c * kernel.length];
      for (uint32_t tap = 0; tap < kernel.length; ++tap) {
        long idx = t - pad + static_cast<long>(tap) * static_cast<long>(kernel.dilation);
        if (idx < 0 || idx >= l) continue;
        acc += w[tap] * static_cast<double>(column[static_cast<size_t>(idx) * width]);
      }
    }
    if (acc > 0.0) ++positive;
    if (acc > best) best = acc;
  }
  ppv = static_cast<double>(positive) / static_cast<double>(out_len);
  max_out = best;
}

std::vector<double> apply_kernels(const FeatureTensor& tensor,
                                  const std::vector<RocketKernel>& kernels, int jobs) {
  for (const auto& k : kernels)
    for (uint32_t c : k.channels)
      if (c >= tensor.d) fail(ErrorCode::ShapeMismatch, "kernel channel exceeds tensor width");

  std::vector<double> features(tensor.n * kernels.size() * 2, 0.0);
  parallel_for(tensor.n, jobs, [&](size_t i) {
    const float* sample = &tensor.data[i * tensor.l * tensor.d];
    double* row = &features[i * kernels.size() * 2];
    for (size_t k = 0; k < kernels.size(); ++k)
      apply_kernel(sample, tensor.l, tensor.d, kernels[k], row[2 * k], row[2 * k + 1]);
  });
  return features;
}

// -------------------------------------------------------------------------

namespace {

struct Standardized {
  std::vector<double> z;  // n x p
  std::vector<double> mean, std;
};

Standardized standardize(const std::vector<double>& features, size_t n, size_t p) {
  Standardized s;
  s.mean.assign(p, 0.0);
  s.std.assign(p, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < p; ++j) s.mean[j] += features[i * p + j];
  for (auto& m : s.mean) m /= static_cast<double>(n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < p; ++j) {
      double d = features[i * p + j] - s.mean[j];
      s.std[j] += d * d;
    }
  for (auto& v : s.std) {
    v = std::sqrt(v / static_cast<double>(n));
    if (v < 1e-12) v = 1.0;  // constant column: becomes all-zero
  }
  s.z.resize(n * p);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < p; ++j)
      s.z[i * p + j] = (features[i * p + j] - s.mean[j]) / s.std[j];
  return s;
}

/// beta (classes x p) + intercepts for standardized Z and +-1 targets.
void solve_ridge(const std::vector<double>& z, size_t n, size_t p,
                 const std::vector<int>& labels, const std::vector<int>& classes, double alpha,
                 std::vector<double>& beta, std::vector<double>& intercept) {
  const size_t n_classes = classes.size();
  beta.assign(n_classes * p, 0.0);
  intercept.assign(n_classes, 0.0);

  std::vector<double> targets(n_classes * n);
  for (size_t c = 0; c < n_classes; ++c) {
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double y = labels[i] == classes[c] ? 1.0 : -1.0;
      targets[c * n + i] = y;
      mean += y;
    }
    intercept[c] = mean / static_cast<double>(n);
  }

  if (p <= n) {
    // Primal: (Z^T Z + alpha I) beta = Z^T y.
    std::vector<double> gram(p * p, 0.0);
    for (size_t i = 0; i < n; ++i) {
      const double* zi = &z[i * p];
      for (size_t a = 0; a < p; ++a) {
        double za = zi[a];
        if (za == 0.0) continue;
        for (size_t b = a; b < p; ++b) gram[a * p + b] += za * zi[b];
      }
    }
    for (size_t a = 0; a < p; ++a) {
      for (size_t b = 0; b < a; ++b) gram[a * p + b] = gram[b * p + a];
      gram[a * p + a] += alpha;
    }
    std::vector<double> rhs(n_classes * p, 0.0);
    for (size_t c = 0; c < n_classes; ++c)
      for (size_t i = 0; i < n; ++i) {
        double y = targets[c * n + i];
        const double* zi = &z[i * p];
        for (size_t j = 0; j < p; ++j) rhs[c * p + j] += zi[j] * y;
      }
    auto solution = cholesky_solve_multi(std::move(gram), std::move(rhs), p, n_classes);
    beta = std::move(solution);
  } else {
    // Dual: beta = Z^T u with (Z Z^T + alpha I) u = y - mean(y).
    std::vector<double> gram(n * n, 0.0);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i; j < n; ++j) {
        double dot = 0.0;
        const double* zi = &z[i * p];
        const double* zj = &z[j * p];
        for (size_t f = 0; f < p; ++f) dot += zi[f] * zj[f];
        gram[i * n + j] = dot;
        gram[j * n + i] = dot;
      }
    for (size_t i = 0; i < n; ++i) gram[i * n + i] += alpha;
    std::vector<double> rhs(n_classes * n);
    for (size_t c = 0; c < n_classes; ++c)
      for (size_t i = 0; i < n; ++i) rhs[c * n + i] = targets[c * n + i] - intercept[c];
    auto dual = cholesky_solve_multi(std::move(gram), std::move(rhs), n, n_classes);
    for (size_t c = 0; c < n_classes; ++c)
      for (size_t i = 0; i < n; ++i) {
        double u = dual[c * n + i];
        if (u == 0.0) continue;
        const double* zi = &z[i * p];
        double* bc = &beta[c * p];
        for (size_t f = 0; f < p; ++f) bc[f] += u * zi[f];
      }
  }
}

int argmax_class(const std::vector<double>& scores, const std::vector<int>& classes) {
  size_t best = 0;
  for (size_t c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  return classes[best];
}

}  // namespace

std::vector<double> RidgeModel::scores(const double* features) const {
  const size_t p = feature_count();
  std::vector<double> out(classes.size());
  for (size_t c = 0; c < classes.size(); ++c) {
    double acc = intercept[c];
    const double* bc = &beta[c * p];
    for (size_t j = 0; j < p; ++j)
      acc += bc[j] * ((features[j] - feature_mean[j]) / feature_std[j]);
    out[c] = acc;
  }
  return out;
}

int RidgeModel::predict(const double* features) const {
  return argmax_class(scores(features), classes);
}

RidgeModel fit_ridge(const std::vector<double>& features, size_t n, size_t p,
                     const std::vector<int>& labels, const RidgeConfig& config, uint64_t seed) {
  if (n < 2) fail(ErrorCode::EmptyTrainingSet, "ridge needs at least two samples");
  if (labels.size() != n) fail(ErrorCode::ShapeMismatch, "label count mismatch");
  if (config.alpha_grid.empty()) fail(ErrorCode::InvalidConfig, "alpha grid is empty");

  std::set<int> class_set(labels.begin(), labels.end());
  if (class_set.size() < 2) fail(ErrorCode::DegenerateLabels, "need at least two classes");
  std::vector<int> classes(class_set.begin(), class_set.end());

  RidgeModel model;
  model.classes = classes;

  auto standardized = standardize(features, n, p);
  model.feature_mean = standardized.mean;
  model.feature_std = standardized.std;

  double best_alpha = config.alpha_grid.front();
  if (config.alpha_grid.size() > 1) {
    // Internal CV on the training data, deterministic fold assignment.
    size_t folds = std::min<size_t>(config.cv_folds, n);
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(seed, 0xA1FA));
    rng.shuffle(order);
    std::vector<size_t> fold_of(n);
    for (size_t i = 0; i < n; ++i) fold_of[order[i]] = i % folds;

    double best_acc = -1.0;
    for (double alpha : config.alpha_grid) {
      size_t correct = 0, total = 0;
      for (size_t fold = 0; fold < folds; ++fold) {
        std::vector<size_t> train_ix, val_ix;
        for (size_t i = 0; i < n; ++i)
          (fold_of[i] == fold ? val_ix : train_ix).push_back(i);
        if (train_ix.empty() || val_ix.empty()) continue;
        std::set<int> fold_classes;
        for (size_t i : train_ix) fold_classes.insert(labels[i]);
        if (fold_classes.size() < 2) continue;

        std::vector<double> sub(train_ix.size() * p);
        std::vector<int> sub_labels(train_ix.size());
        for (size_t r = 0; r < train_ix.size(); ++r) {
          std::copy_n(&features[train_ix[r] * p], p, &sub[r * p]);
          sub_labels[r] = labels[train_ix[r]];
        }
        std::vector<int> fold_class_list(fold_classes.begin(), fold_classes.end());
        auto fold_std = standardize(sub, train_ix.size(), p);
        std::vector<double> fold_beta, fold_intercept;
        solve_ridge(fold_std.z, train_ix.size(), p, sub_labels, fold_class_list, alpha,
                    fold_beta, fold_intercept);
        for (size_t i : val_ix) {
          std::vector<double> scores(fold_class_list.size());
          for (size_t c = 0; c < fold_class_list.size(); ++c) {
            double acc = fold_intercept[c];
            for (size_t j = 0; j < p; ++j)
              acc += fold_beta[c * p + j] *
                     ((features[i * p + j] - fold_std.mean[j]) / fold_std.std[j]);
            scores[c] = acc;
          }
          correct += argmax_class(scores, fold_class_list) == labels[i];
          ++total;
        }
      }
      double acc = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
      if (acc > best_acc) {  // ties keep the earlier (smaller) alpha
        best_acc = acc;
        best_alpha = alpha;
      }
    }
  }

  model.alpha = best_alpha;
  solve_ridge(standardized.z, n, p, labels, classes, best_alpha, model.beta, model.intercept);
  return model;
}

double ridge_residual_inf(const std::vector<double>& features, size_t n, size_t p,
                          const std::vector<int>& labels, const RidgeModel& model) {
  std::vector<double> z(n * p);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < p; ++j)
      z[i * p + j] = (features[i * p + j] - model.feature_mean[j]) / model.feature_std[j];

  double worst = 0.0;
  for (size_t c = 0; c < model.classes.size(); ++c) {
    // r = Z^T (Z beta) + alpha beta - Z^T y, accumulated without forming Z^T Z.
    std::vector<double> residual(p, 0.0);
    const double* bc = &model.beta[c * p];
    for (size_t i = 0; i < n; ++i) {
      const double* zi = &z[i * p];
      double zb = 0.0;
      for (size_t j = 0; j < p; ++j) zb += zi[j] * bc[j];
      double y = labels[i] == model.classes[c] ? 1.0 : -1.0;
      double coeff = zb - y;
      for (size_t j = 0; j < p; ++j) residual[j] += zi[j] * coeff;
    }
    for (size_t j = 0; j < p; ++j)
      worst = std::max(worst, std::abs(residual[j] + model.alpha * bc[j]));
  }
  return worst;
}

}  // namespace provts
