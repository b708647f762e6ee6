#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace rulekit::detail {

// Dense symmetric positive-definite solve via Cholesky. a is row-major n x n
// and is consumed; b is overwritten with the solution. Throws when the
// factorization breaks down (matrix not positive definite).
inline void cholesky_solve_in_place(std::vector<double>& a, std::vector<double>& b, size_t n) {
  if (a.size() != n * n || b.size() != n) throw std::invalid_argument("cholesky: size mismatch");
  // a := L with a = L L^T
  for (size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw std::runtime_error("cholesky: matrix not positive definite");
    }
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
  // forward substitution L y = b
  for (size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  // back substitution L^T x = y
  for (size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * b[k];
    b[ii] = s / a[ii * n + ii];
  }
}

}  // namespace rulekit::detail
