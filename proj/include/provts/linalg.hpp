#pragma once

#include <cstddef>
#include <vector>

namespace provts {

/// Solves A x = b for symmetric positive definite A (n x n, row-major)
/// via Cholesky. Throws SingularSystem if a pivot collapses.
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b, size_t n);

/// Solves for several right-hand sides at once; rhs is n x m column-major
/// (each column one system), result likewise.
std::vector<double> cholesky_solve_multi(std::vector<double> a, std::vector<double> rhs, size_t n,
                                         size_t m);

}  // namespace provts
