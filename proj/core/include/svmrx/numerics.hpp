#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "svmrx/errors.hpp"

namespace svmrx {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

// Dense row-major complex matrix.  Only the small handful of operations the
// receivers need; dimensions here never exceed a few dozen.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols) {}

  static ComplexMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  ComplexMatrix adjoint() const;

  ComplexMatrix& operator+=(const ComplexMatrix& rhs);
  ComplexMatrix& operator-=(const ComplexMatrix& rhs);
  ComplexMatrix& operator*=(double s);

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
  CVector operator*(const CVector& v) const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  CVector a_;
};

// Hermitian matrix with the symmetry maintained by construction: set()
// writes both (i,j) and the conjugate at (j,i), and forces diagonal entries
// real.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(std::size_t dim) : m_(dim, dim) {}

  std::size_t dim() const { return m_.rows(); }

  const Complex& at(std::size_t i, std::size_t j) const { return m_(i, j); }

  void set(std::size_t i, std::size_t j, Complex v) {
    if (i == j) v = Complex(v.real(), 0.0);
    m_(i, j) = v;
    m_(j, i) = std::conj(v);
  }

  // Fill from entry(i, j) evaluated on the lower triangle (i >= j).
  template <class F>
  static HermitianMatrix build(std::size_t dim, F&& entry) {
    HermitianMatrix h(dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j <= i; ++j) h.set(i, j, entry(i, j));
    return h;
  }

  // Adopt a general matrix, checking Hermitian symmetry to `tol` (absolute).
  static HermitianMatrix from_matrix(const ComplexMatrix& m, double tol = 1e-9);

  const ComplexMatrix& matrix() const { return m_; }

 private:
  ComplexMatrix m_;
};

// Lower-triangular Cholesky factor L with A = L L^H.  Solves and quadratic
// forms reuse the factorization; log|A| = 2 sum log L_jj.
class CholeskyFactor {
 public:
  std::size_t dim() const { return l_.rows(); }
  const ComplexMatrix& lower() const { return l_; }

  // Solve A x = b via forward/back substitution.
  CVector solve(const CVector& b) const;

  // y^H A^{-1} y = ||L^{-1} y||^2; real and nonnegative by construction.
  double quadratic_form(const CVector& y) const;

  double log_det() const;

 private:
  friend CholeskyFactor cholesky(const HermitianMatrix& a);
  explicit CholeskyFactor(ComplexMatrix l) : l_(std::move(l)) {}
  ComplexMatrix l_;
};

// Factor a Hermitian positive-definite matrix.  A pivot at or below
// 1e-14 * max(diagonal) throws NotPositiveDefinite.
CholeskyFactor cholesky(const HermitianMatrix& a);

// One-shot conveniences over a fresh factorization.
CVector hermitian_solve(const HermitianMatrix& a, const CVector& b);
double quadratic_form(const HermitianMatrix& a, const CVector& y);
double log_det(const HermitianMatrix& a);

}  // namespace svmrx
