#pragma once

// Shared helpers for the unit suites.  The matrix oracle here is a plain
// Gauss-Jordan explicit inverse -- a different algorithm from both the
// production Cholesky path and the elimination solver used by `svmrx
// selftest`, so the three routes check each other.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "svmrx/numerics.hpp"
#include "svmrx/rng.hpp"

namespace svmrx::testutil {

// Explicit inverse by Gauss-Jordan elimination with partial pivoting.
inline ComplexMatrix gj_inverse(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("gj_inverse: not square");
  const std::size_t n = a.rows();
  ComplexMatrix work = a;
  ComplexMatrix inv = ComplexMatrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(work(i, col)) > std::abs(work(piv, col))) piv = i;
    if (std::abs(work(piv, col)) < 1e-300) throw std::runtime_error("gj_inverse: singular");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(work(piv, j), work(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    const Complex d = work(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      work(col, j) /= d;
      inv(col, j) /= d;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col) continue;
      const Complex f = work(i, col);
      if (f == Complex{}) continue;
      for (std::size_t j = 0; j < n; ++j) {
        work(i, j) -= f * work(col, j);
        inv(i, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

// y^H M y for a general square M (oracle-side quadratic form).
inline double quad_via(const ComplexMatrix& m, const CVector& y) {
  Complex acc = 0.0;
  const CVector my = m * y;
  for (std::size_t i = 0; i < y.size(); ++i) acc += std::conj(y[i]) * my[i];
  return acc.real();
}

// Random Hermitian positive-definite matrix: B B^H + ridge I with B drawn
// from the deterministic Rng, so every run sees the same matrices.
inline HermitianMatrix random_hpd(Rng& rng, std::size_t n, double ridge = 0.5) {
  ComplexMatrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = rng.complex_gaussian(1.0);
  ComplexMatrix prod = b * b.adjoint();
  for (std::size_t i = 0; i < n; ++i) prod(i, i) += ridge;
  return HermitianMatrix::from_matrix(prod, 1e-9);
}

inline CVector random_cvector(Rng& rng, std::size_t n, double variance = 1.0) {
  CVector v(n);
  for (auto& x : v) x = rng.complex_gaussian(variance);
  return v;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
  return worst;
}

inline double max_abs_diff(const CVector& a, const CVector& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace svmrx::testutil
