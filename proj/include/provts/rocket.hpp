#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "provts/tensor.hpp"

namespace provts {

/// One random convolutional kernel: dilated taps over a random channel
/// subset, weights jointly mean-centered, optional symmetric zero padding.
struct RocketKernel {
  uint32_t length = 9;
  uint32_t dilation = 1;
  uint32_t padding = 0;
  double bias = 0.0;
  std::vector<uint32_t> channels;
  std::vector<double> weights;  // channels.size() x length, channel-major

  bool operator==(const RocketKernel&) const = default;
};

struct RocketConfig {
  size_t n_kernels = 5000;

  std::string to_json() const;
  static RocketConfig from_json(const std::string& text);
};

/// Samples n_kernels kernels for series of the given length/width:
/// lengths uniform over {7,9,11}, centered N(0,1) weights, bias U(-1,1),
/// dilation 2^U(0, log2((l-1)/(len-1))), padding on with probability 1/2,
/// channel subset of size 2^U(0, log2(d)). Deterministic per seed.
std::vector<RocketKernel> sample_kernels(size_t series_length, size_t n_channels,
                                         const RocketConfig& config, uint64_t seed);

std::string kernels_to_bytes(const std::vector<RocketKernel>& kernels);
std::vector<RocketKernel> kernels_from_bytes(const std::string& bytes);

/// [PPV, max] of one kernel's convolution output over one sample.
void apply_kernel(const float* data, size_t length, size_t width, const RocketKernel& kernel,
                  double& ppv, double& max_out);

/// n x (2 * n_kernels) feature matrix, kernel-major [ppv, max] pairs.
std::vector<double> apply_kernels(const FeatureTensor& tensor,
                                  const std::vector<RocketKernel>& kernels, int jobs = 1);

// -------------------------------------------------------------------------
// Ridge regression head (one-vs-rest +-1 targets on standardized features).

struct RidgeConfig {
  std::vector<double> alpha_grid = {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0};
  size_t cv_folds = 5;
};

struct RidgeModel {
  std::vector<int> classes;          // ascending class codes
  std::vector<double> feature_mean;  // standardization, fitted on train
  std::vector<double> feature_std;
  std::vector<double> beta;          // classes x features, row-major
  std::vector<double> intercept;     // per class
  double alpha = 1.0;

  size_t feature_count() const { return feature_mean.size(); }
  /// Per-class scores for one raw (unstandardized) feature row.
  std::vector<double> scores(const double* features) const;
  int predict(const double* features) const;  // argmax, ties -> smaller code
};

/// Solves (Z^T Z + alpha I) beta = Z^T y per class; alpha picked from the
/// grid by internal cross-validated accuracy (ties -> smaller alpha). Uses
/// the dual n x n system when features outnumber samples.
RidgeModel fit_ridge(const std::vector<double>& features, size_t n, size_t p,
                     const std::vector<int>& labels, const RidgeConfig& config, uint64_t seed);

/// max_c |(Z^T Z + alpha I) beta_c - Z^T y_c| in the standardized feature
/// space; the solver's post-condition keeps this below 1e-6.
double ridge_residual_inf(const std::vector<double>& features, size_t n, size_t p,
                          const std::vector<int>& labels, const RidgeModel& model);

}  // namespace provts
