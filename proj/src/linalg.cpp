#include "provts/linalg.hpp"

#include <cmath>

#include "provts/common.hpp"

namespace provts {

namespace {

// In-place lower Cholesky factor of a row-major SPD matrix.
void cholesky_factor(std::vector<double>& a, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j <= i; ++j) {
      double sum = a[i * n + j];
      for (size_t k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (sum <= 0.0) fail(ErrorCode::SingularSystem, "matrix is not positive definite");
        a[i * n + j] = std::sqrt(sum);
      } else {
        a[i * n + j] = sum / a[j * n + j];
      }
    }
  }
}

}  // namespace

std::vector<double> cholesky_solve_multi(std::vector<double> a, std::vector<double> rhs, size_t n,
                                         size_t m) {
  if (a.size() != n * n || rhs.size() != n * m)
    fail(ErrorCode::ShapeMismatch, "cholesky_solve: inconsistent sizes");
  cholesky_factor(a, n);
  for (size_t col = 0; col < m; ++col) {
    double* x = &rhs[col * n];
    for (size_t i = 0; i < n; ++i) {  // forward: L y = b
      double sum = x[i];
      for (size_t k = 0; k < i; ++k) sum -= a[i * n + k] * x[k];
      x[i] = sum / a[i * n + i];
    }
    for (size_t ii = n; ii-- > 0;) {  // backward: L^T x = y
      double sum = x[ii];
      for (size_t k = ii + 1; k < n; ++k) sum -= a[k * n + ii] * x[k];
      x[ii] = sum / a[ii * n + ii];
    }
  }
  return rhs;
}

std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b, size_t n) {
  return cholesky_solve_multi(std::move(a), std::move(b), n, 1);
}

}  // namespace provts
