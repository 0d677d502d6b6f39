#include "svmrx/numerics.hpp"

#include <cmath>
#include <string>

namespace svmrx {

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix m(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
  return m;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
    throw DimensionMismatch("matrix add: shape mismatch");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += rhs.a_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
    throw DimensionMismatch("matrix sub: shape mismatch");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= rhs.a_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(double s) {
  for (auto& v : a_) v *= s;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols_ != b.rows_) throw DimensionMismatch("matrix mul: inner dims differ");
  ComplexMatrix c(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i) {
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

CVector ComplexMatrix::operator*(const CVector& v) const {
  if (cols_ != v.size()) throw DimensionMismatch("matvec: size mismatch");
  CVector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

HermitianMatrix HermitianMatrix::from_matrix(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) throw DimensionMismatch("hermitian: matrix not square");
  HermitianMatrix h(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const Complex lo = m(i, j);
      const Complex up = std::conj(m(j, i));
      if (std::abs(lo - up) > tol)
        throw DimensionMismatch("hermitian: symmetry violated beyond tolerance");
      // Average the two triangles so tiny asymmetries cancel.
      h.set(i, j, 0.5 * (lo + up));
    }
  }
  return h;
}

namespace {
constexpr double kPivotRel = 1e-14;  // pivot threshold relative to max diagonal
}

CholeskyFactor cholesky(const HermitianMatrix& a) {
  const std::size_t n = a.dim();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a.at(i, i).real());
  if (n == 0 || max_diag <= 0.0)
    throw NotPositiveDefinite("cholesky: nonpositive diagonal");
  const double threshold = kPivotRel * max_diag;

  ComplexMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a.at(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (d <= threshold)
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(d) +
                                " at column " + std::to_string(j));
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      Complex s = a.at(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  return CholeskyFactor(std::move(l));
}

CVector CholeskyFactor::solve(const CVector& b) const {
  const std::size_t n = dim();
  if (b.size() != n) throw DimensionMismatch("cholesky solve: rhs size mismatch");
  // L u = b
  CVector u(n);
  for (std::size_t i = 0; i < n; ++i) {
    Complex s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * u[k];
    u[i] = s / l_(i, i).real();
  }
  // L^H x = u
  CVector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    Complex s = u[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= std::conj(l_(k, ii)) * x[k];
    x[ii] = s / l_(ii, ii).real();
  }
  return x;
}

double CholeskyFactor::quadratic_form(const CVector& y) const {
  const std::size_t n = dim();
  if (y.size() != n) throw DimensionMismatch("quadratic form: size mismatch");
  // u = L^{-1} y, then y^H A^{-1} y = ||u||^2.
  CVector u(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Complex s = y[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * u[k];
    u[i] = s / l_(i, i).real();
    acc += std::norm(u[i]);
  }
  return acc;
}

double CholeskyFactor::log_det() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) acc += std::log(l_(i, i).real());
  return 2.0 * acc;
}

CVector hermitian_solve(const HermitianMatrix& a, const CVector& b) {
  return cholesky(a).solve(b);
}

double quadratic_form(const HermitianMatrix& a, const CVector& y) {
  return cholesky(a).quadratic_form(y);
}

double log_det(const HermitianMatrix& a) { return cholesky(a).log_det(); }

}  // namespace svmrx
