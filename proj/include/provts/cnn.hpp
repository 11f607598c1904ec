#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "provts/tensor.hpp"

namespace provts {

struct CnnConfig {
  size_t filters = 10;        // F_N
  size_t filter_length = 10;  // F_L
  size_t epochs = 100;
  size_t batch_size = 32;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  std::string to_json() const;
  static CnnConfig from_json(const std::string& text);
};

/// conv(F_N x F_L, valid, stride 1) -> ReLU -> conv -> ReLU -> global
/// average pooling -> affine -> softmax, parameters flattened into one
/// vector in double precision.
struct CnnNet {
  size_t input_len = 0;
  size_t input_dim = 0;
  size_t filters = 0;
  size_t filter_length = 0;
  size_t n_classes = 0;
  std::vector<double> params;

  void init_shapes(size_t len, size_t dim, size_t f, size_t flen, size_t classes);

  size_t conv1_out() const { return input_len - filter_length + 1; }
  size_t conv2_out() const { return conv1_out() - filter_length + 1; }
  size_t param_count() const;

  // Offsets into params.
  size_t off_w1() const { return 0; }
  size_t off_b1() const { return filters * filter_length * input_dim; }
  size_t off_w2() const { return off_b1() + filters; }
  size_t off_b2() const { return off_w2() + filters * filter_length * filters; }
  size_t off_wf() const { return off_b2() + filters; }
  size_t off_bf() const { return off_wf() + n_classes * filters; }

  /// Class probabilities for one sample (length x dim, row-major floats).
  std::vector<double> forward(const float* sample) const;

  /// Cross-entropy loss of one sample; when grad is non-null the gradient
  /// w.r.t. every parameter is accumulated into it (same layout as params).
  double loss_and_grad(const float* sample, size_t target_class, std::vector<double>* grad) const;

  std::string params_to_bytes() const;
  void params_from_bytes(const std::string& bytes);
};

/// conv1d with valid padding, stride 1: out[t,f] = bias[f] +
/// sum_{tap,c} input[t+tap,c] * kernels[f,tap,c]. InputTooShort if the
/// input is shorter than the kernel.
std::vector<double> conv1d_forward(const std::vector<double>& input, size_t len, size_t channels,
                                   const std::vector<double>& kernels, size_t n_filters,
                                   size_t filter_length, const std::vector<double>& bias);

struct CnnModel {
  CnnConfig config;
  std::vector<int> classes;  // ascending class codes
  CnnNet net;
  std::vector<double> epoch_loss;

  std::vector<double> scores(const float* sample) const { return net.forward(sample); }
  int predict(const float* sample) const;
};

/// Full-batch-shuffled mini-batch Adam for exactly config.epochs epochs,
/// deterministic for a fixed seed regardless of the job count.
CnnModel train_cnn(const FeatureTensor& train, const std::vector<int>& labels,
                   const CnnConfig& config, uint64_t seed, int jobs = 1);

}  // namespace provts
