#pragma once

// Independent reference implementations used to check the library. These
// deliberately take different routes than the production code: exhaustive
// path enumeration instead of dynamic programming, explicitly padded
// buffers instead of index arithmetic, Gaussian elimination instead of
// Cholesky.

#include <cmath>
#include <limits>
#include <vector>

#include "provts/rocket.hpp"

namespace oracles {

inline double frame_cost(const std::vector<double>& a, const std::vector<double>& b, size_t dim,
                         size_t i, size_t j) {
  double acc = 0.0;
  for (size_t f = 0; f < dim; ++f) {
    double diff = a[i * dim + f] - b[j * dim + f];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

inline void dtw_enumerate(const std::vector<double>& a, const std::vector<double>& b, size_t dim,
                          size_t la, size_t lb, size_t i, size_t j, double cost, double& best) {
  cost += frame_cost(a, b, dim, i, j);
  if (cost >= best) return;  // paths only grow
  if (i == la - 1 && j == lb - 1) {
    best = cost;
    return;
  }
  if (i + 1 < la) dtw_enumerate(a, b, dim, la, lb, i + 1, j, cost, best);
  if (j + 1 < lb) dtw_enumerate(a, b, dim, la, lb, i, j + 1, cost, best);
  if (i + 1 < la && j + 1 < lb) dtw_enumerate(a, b, dim, la, lb, i + 1, j + 1, cost, best);
}

/// Minimum alignment cost over every monotone warping path (exponential;
/// keep lengths <= 8).
inline double dtw_exhaustive(const std::vector<double>& a, const std::vector<double>& b,
                             size_t dim) {
  size_t la = a.size() / dim, lb = b.size() / dim;
  double best = std::numeric_limits<double>::infinity();
  dtw_enumerate(a, b, dim, la, lb, 0, 0, 0.0, best);
  return best;
}

/// Valid 1-D convolution, written with the filter loop outermost.
inline std::vector<double> conv1d_naive(const std::vector<double>& input, size_t len,
                                        size_t channels, const std::vector<double>& kernels,
                                        size_t n_filters, size_t filter_length,
                                        const std::vector<double>& bias) {
  size_t out_len = len - filter_length + 1;
  std::vector<double> out(out_len * n_filters, 0.0);
  for (size_t f = 0; f < n_filters; ++f)
    for (size_t t = 0; t < out_len; ++t) {
      double acc = bias[f];
      for (size_t tap = 0; tap < filter_length; ++tap)
        for (size_t c = 0; c < channels; ++c)
          acc += input[(t + tap) * channels + c] * kernels[(f * filter_length + tap) * channels + c];
      out[t * n_filters + f] = acc;
    }
  return out;
}

/// Dilated multichannel kernel features computed on an explicitly padded
/// copy of the series.
inline void rocket_kernel_naive(const std::vector<float>& series, size_t len, size_t width,
                                const provts::RocketKernel& kernel, double& ppv, double& max_out) {
  size_t pad = kernel.padding;
  size_t padded_len = len + 2 * pad;
  std::vector<double> padded(padded_len * width, 0.0);
  for (size_t t = 0; t < len; ++t)
    for (size_t c = 0; c < width; ++c)
      padded[(t + pad) * width + c] = static_cast<double>(series[t * width + c]);

  size_t span = (kernel.length - 1) * kernel.dilation;
  size_t out_len = padded_len - span;
  size_t positive = 0;
  max_out = -std::numeric_limits<double>::infinity();
  for (size_t t = 0; t < out_len; ++t) {
    double acc = kernel.bias;
    for (size_t c = 0; c < kernel.channels.size(); ++c)
      for (size_t tap = 0; tap < kernel.length; ++tap)
        acc += kernel.weights[c * kernel.length + tap] *
               padded[(t + tap * kernel.dilation) * width + kernel.channels[c]];
    if (acc > 0.0) ++positive;
    if (acc > max_out) max_out = acc;
  }
  ppv = static_cast<double>(positive) / static_cast<double>(out_len);
}

/// Dense solve via Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(std::vector<double> a, std::vector<double> b, size_t n) {
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (pivot != col) {
      for (size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    double diag = a[col * n + col];
    for (size_t r = col + 1; r < n; ++r) {
      double factor = a[r * n + col] / diag;
      if (factor == 0.0) continue;
      for (size_t c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n);
  for (size_t rr = n; rr-- > 0;) {
    double acc = b[rr];
    for (size_t c = rr + 1; c < n; ++c) acc -= a[rr * n + c] * x[c];
    x[rr] = acc / a[rr * n + rr];
  }
  return x;
}

}  // namespace oracles
