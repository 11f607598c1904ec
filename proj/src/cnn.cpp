#include "provts/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include <json.hpp>

namespace provts {

using nlohmann::json;

std::string CnnConfig::to_json() const {
  json doc;
  doc["filters"] = filters;
  doc["filter_length"] = filter_length;
  doc["epochs"] = epochs;
  doc["batch_size"] = batch_size;
  doc["learning_rate"] = learning_rate;
  doc["adam_beta1"] = adam_beta1;
  doc["adam_beta2"] = adam_beta2;
  doc["adam_epsilon"] = adam_epsilon;
  return doc.dump(2) + "\n";
}

CnnConfig CnnConfig::from_json(const std::string& text) {
  json doc = json::parse(text);
  CnnConfig config;
  config.filters = doc.value("filters", size_t{10});
  config.filter_length = doc.value("filter_length", size_t{10});
  config.epochs = doc.value("epochs", size_t{100});
  config.batch_size = doc.value("batch_size", size_t{32});
  config.learning_rate = doc.value("learning_rate", 1e-3);
  config.adam_beta1 = doc.value("adam_beta1", 0.9);
  config.adam_beta2 = doc.value("adam_beta2", 0.999);
  config.adam_epsilon = doc.value("adam_epsilon", 1e-8);
  if (config.filters < 1 || config.filter_length < 1 || config.epochs < 1 ||
      config.batch_size < 1)
    fail(ErrorCode::InvalidConfig, "CNN hyperparameters must be >= 1");
  return config;
}

void CnnNet::init_shapes(size_t len, size_t dim, size_t f, size_t flen, size_t classes) {
  if (len < 2 * flen - 1)
    fail(ErrorCode::InputTooShort, "two valid convolutions need length >= 2*F_L - 1");
  input_len = len;
  input_dim = dim;
  filters = f;
  filter_length = flen;
  n_classes = classes;
  params.assign(param_count(), 0.0);
}

size_t CnnNet::param_count() const {
  return filters * filter_length * input_dim + filters + filters * filter_length * filters +
         filters + n_classes * filters + n_classes;
}

std::vector<double> conv1d_forward(const std::vector<double>& input, size_t len, size_t channels,
                                   const std::vector<double>& kernels, size_t n_filters,
                                   size_t filter_length, const std::vector<double>& bias) {
  if (len < filter_length) fail(ErrorCode::InputTooShort, "input shorter than the kernel");
  if (input.size() != len * channels || kernels.size() != n_filters * filter_length * channels ||
      bias.size() != n_filters)
    fail(ErrorCode::ShapeMismatch, "conv1d_forward: inconsistent sizes");
  const size_t out_len = len - filter_length + 1;
  std::vector<double> out(out_len * n_filters);
  for (size_t t = 0; t < out_len; ++t)
    for (size_t f = 0; f < n_filters; ++f) {
      double acc = bias[f];
      const double* w = &kernels[f * filter_length * channels];
      for (size_t tap = 0; tap < filter_length; ++tap) {
        const double* row = &input[(t + tap) * channels];
        const double* wt = &w[tap * channels];
        for (size_t c = 0; c < channels; ++c) acc += row[c] * wt[c];
      }
      out[t * n_filters + f] = acc;
    }
  return out;
}

namespace {

struct Activations {
  std::vector<double> a1, r1, a2, r2, gap, probs;
};

void forward_pass(const CnnNet& net, const float* sample, Activations& act) {
  const size_t l1 = net.conv1_out(), l2 = net.conv2_out();
  const size_t F = net.filters, FL = net.filter_length, D = net.input_dim, K = net.n_classes;
  const double* w1 = &net.params[net.off_w1()];
  const double* b1 = &net.params[net.off_b1()];
  const double* w2 = &net.params[net.off_w2()];
  const double* b2 = &net.params[net.off_b2()];
  const double* wf = &net.params[net.off_wf()];
  const double* bf = &net.params[net.off_bf()];

  act.a1.assign(l1 * F, 0.0);
  for (size_t t = 0; t < l1; ++t)
    for (size_t f = 0; f < F; ++f) {
      double acc = b1[f];
      const double* w = &w1[f * FL * D];
      for (size_t tap = 0; tap < FL; ++tap) {
        const float* row = sample + (t + tap) * D;
        const double* wt = &w[tap * D];
        for (size_t c = 0; c < D; ++c) acc += static_cast<double>(row[c]) * wt[c];
      }
      act.a1[t * F + f] = acc;
    }
  act.r1 = act.a1;
  for (auto& v : act.r1) v = v > 0.0 ? v : 0.0;

  act.a2.assign(l2 * F, 0.0);
  for (size_t t = 0; t < l2; ++t)
    for (size_t g = 0; g < F; ++g) {
      double acc = b2[g];
      const double* w = &w2[g * FL * F];
      for (size_t tap = 0; tap < FL; ++tap) {
        const double* row = &act.r1[(t + tap) * F];
        const double* wt = &w[tap * F];
        for (size_t f = 0; f < F; ++f) acc += row[f] * wt[f];
      }
      act.a2[t * F + g] = acc;
    }
  act.r2 = act.a2;
  for (auto& v : act.r2) v = v > 0.0 ? v : 0.0;

  act.gap.assign(F, 0.0);
  for (size_t t = 0; t < l2; ++t)
    for (size_t g = 0; g < F; ++g) act.gap[g] += act.r2[t * F + g];
  for (auto& v : act.gap) v /= static_cast<double>(l2);

  act.probs.assign(K, 0.0);
  double max_logit = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < K; ++k) {
    double acc = bf[k];
    for (size_t g = 0; g < F; ++g) acc += wf[k * F + g] * act.gap[g];
    act.probs[k] = acc;
    max_logit = std::max(max_logit, acc);
  }
  double sum = 0.0;
  for (auto& v : act.probs) {
    v = std::exp(v - max_logit);
    sum += v;
  }
  for (auto& v : act.probs) v /= sum;
}

}  // namespace

std::vector<double> CnnNet::forward(const float* sample) const {
  Activations act;
  forward_pass(*this, sample, act);
  return act.probs;
}

double CnnNet::loss_and_grad(const float* sample, size_t target_class,
                             std::vector<double>* grad) const {
  Activations act;
  forward_pass(*this, sample, act);
  double loss = -std::log(std::max(act.probs[target_class], 1e-300));
  if (!grad) return loss;
  if (grad->size() != params.size()) grad->assign(params.size(), 0.0);

  const size_t l1 = conv1_out(), l2 = conv2_out();
  const size_t F = filters, FL = filter_length, D = input_dim, K = n_classes;
  const double* w2 = &params[off_w2()];
  const double* wf = &params[off_wf()];
  double* gw1 = &(*grad)[off_w1()];
  double* gb1 = &(*grad)[off_b1()];
  double* gw2 = &(*grad)[off_w2()];
  double* gb2 = &(*grad)[off_b2()];
  double* gwf = &(*grad)[off_wf()];
  double* gbf = &(*grad)[off_bf()];

  std::vector<double> dlogits = act.probs;
  dlogits[target_class] -= 1.0;

  std::vector<double> dgap(F, 0.0);
  for (size_t k = 0; k < K; ++k) {
    gbf[k] += dlogits[k];
    for (size_t g = 0; g < F; ++g) {
      gwf[k * F + g] += dlogits[k] * act.gap[g];
      dgap[g] += dlogits[k] * wf[k * F + g];
    }
  }

  std::vector<double> da2(l2 * F);
  for (size_t t = 0; t < l2; ++t)
    for (size_t g = 0; g < F; ++g)
      da2[t * F + g] =
          act.a2[t * F + g] > 0.0 ? dgap[g] / static_cast<double>(l2) : 0.0;

  std::vector<double> dr1(l1 * F, 0.0);
  for (size_t t = 0; t < l2; ++t)
    for (size_t g = 0; g < F; ++g) {
      double dv = da2[t * F + g];
      if (dv == 0.0) continue;
      gb2[g] += dv;
      const double* w = &w2[g * FL * F];
      for (size_t tap = 0; tap < FL; ++tap) {
        const double* row = &act.r1[(t + tap) * F];
        double* drow = &dr1[(t + tap) * F];
        double* gw = &gw2[g * FL * F + tap * F];
        const double* wt = &w[tap * F];
        for (size_t f = 0; f < F; ++f) {
          gw[f] += dv * row[f];
          drow[f] += dv * wt[f];
        }
      }
    }

  for (size_t t = 0; t < l1; ++t)
    for (size_t f = 0; f < F; ++f) {
      double dv = act.a1[t * F + f] > 0.0 ? dr1[t * F + f] : 0.0;
      if (dv == 0.0) continue;
      gb1[f] += dv;
      double* gw = &gw1[f * FL * D];
      for (size_t tap = 0; tap < FL; ++tap) {
        const float* row = sample + (t + tap) * D;
        double* gwt = &gw[tap * D];
        for (size_t c = 0; c < D; ++c) gwt[c] += dv * static_cast<double>(row[c]);
      }
    }
  return loss;
}

// Weight blob layout: little-endian f32, parameters in the params-vector
// order (conv1 weights, conv1 bias, conv2 weights, conv2 bias, affine
// weights, affine bias).
std::string CnnNet::params_to_bytes() const {
  std::string out;
  out.reserve(params.size() * 4);
  for (double v : params) {
    float f = static_cast<float>(v);
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
  return out;
}

void CnnNet::params_from_bytes(const std::string& bytes) {
  if (bytes.size() != params.size() * 4)
    fail(ErrorCode::ParseError, "CNN weight blob has unexpected size");
  for (size_t i = 0; i < params.size(); ++i) {
    uint32_t bits = 0;
    for (int b = 3; b >= 0; --b)
      bits = (bits << 8) | static_cast<unsigned char>(bytes[i * 4 + static_cast<size_t>(b)]);
    float f;
    std::memcpy(&f, &bits, 4);
    params[i] = static_cast<double>(f);
  }
}

int CnnModel::predict(const float* sample) const {
  auto probs = scores(sample);
  size_t best = 0;
  for (size_t k = 1; k < probs.size(); ++k)
    if (probs[k] > probs[best]) best = k;
  return classes[best];
}

CnnModel train_cnn(const FeatureTensor& train, const std::vector<int>& labels,
                   const CnnConfig& config, uint64_t seed, int jobs) {
  if (labels.size() != train.n) fail(ErrorCode::ShapeMismatch, "label count mismatch");
  if (train.n < config.batch_size)
    fail(ErrorCode::EmptyTrainingSet, "need at least one full batch of samples");
  std::set<int> class_set(labels.begin(), labels.end());
  if (class_set.size() < 2) fail(ErrorCode::DegenerateLabels, "need at least two classes");

  CnnModel model;
  model.config = config;
  model.classes.assign(class_set.begin(), class_set.end());
  model.net.init_shapes(train.l, train.d, config.filters, config.filter_length,
                        model.classes.size());

  std::vector<size_t> class_of(train.n);
  for (size_t i = 0; i < train.n; ++i)
    class_of[i] = static_cast<size_t>(
        std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]) -
        model.classes.begin());

  // Xavier-uniform init, biases zero.
  Rng rng(derive_seed(seed, 0xC4417));
  CnnNet& net = model.net;
  auto xavier = [&](size_t offset, size_t count, size_t fan_in, size_t fan_out) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (size_t i = 0; i < count; ++i) net.params[offset + i] = rng.uniform(-limit, limit);
  };
  const size_t F = config.filters, FL = config.filter_length, D = train.d;
  xavier(net.off_w1(), F * FL * D, FL * D, FL * F);
  xavier(net.off_w2(), F * FL * F, FL * F, FL * F);
  xavier(net.off_wf(), model.classes.size() * F, F, model.classes.size());

  const size_t n_params = net.param_count();
  std::vector<double> adam_m(n_params, 0.0), adam_v(n_params, 0.0);
  double beta1_t = 1.0, beta2_t = 1.0;

  std::vector<size_t> order(train.n);
  for (size_t i = 0; i < train.n; ++i) order[i] = i;

  std::vector<std::vector<double>> sample_grads;
  std::vector<double> sample_losses;
  std::vector<double> batch_grad(n_params);

  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < train.n; start += config.batch_size) {
      size_t batch = std::min(config.batch_size, train.n - start);
      sample_grads.resize(batch);
      sample_losses.assign(batch, 0.0);
      parallel_for(batch, jobs, [&](size_t b) {
        size_t i = order[start + b];
        sample_grads[b].assign(n_params, 0.0);
        sample_losses[b] = net.loss_and_grad(&train.data[i * train.l * train.d], class_of[i],
                                             &sample_grads[b]);
      });
      // Ordered reduction keeps results identical for every job count.
      std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
      for (size_t b = 0; b < batch; ++b) {
        epoch_loss += sample_losses[b];
        const auto& g = sample_grads[b];
        for (size_t j = 0; j < n_params; ++j) batch_grad[j] += g[j];
      }
      double inv = 1.0 / static_cast<double>(batch);
      beta1_t *= config.adam_beta1;
      beta2_t *= config.adam_beta2;
      for (size_t j = 0; j < n_params; ++j) {
        double g = batch_grad[j] * inv;
        adam_m[j] = config.adam_beta1 * adam_m[j] + (1.0 - config.adam_beta1) * g;
        adam_v[j] = config.adam_beta2 * adam_v[j] + (1.0 - config.adam_beta2) * g * g;
        double m_hat = adam_m[j] / (1.0 - beta1_t);
        double v_hat = adam_v[j] / (1.0 - beta2_t);
        net.params[j] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
      }
    }
    model.epoch_loss.push_back(epoch_loss / static_cast<double>(train.n));
  }
  return model;
}

}  // namespace provts
