#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <list>
#include <vector>

#include "svmrx/errors.hpp"
#include "svmrx/svm.hpp"

namespace svmrx {

namespace {

constexpr double kTau = 1e-12;  // curvature floor for degenerate pairs

double dot(const FeatureVector& a, const FeatureVector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Kernel rows on demand.  Small problems keep the full matrix; larger ones
// go through a fixed-budget LRU row cache (the working set concentrates on
// a shrinking boundary set, so hit rates stay high).
class KernelCache {
 public:
  KernelCache(const std::vector<FeatureVector>& x, const KernelSpec& k)
      : x_(x), kernel_(k), n_(x.size()) {
    if (k.kind == KernelKind::Rbf) {
      norms_.resize(n_);
      for (std::size_t i = 0; i < n_; ++i) norms_[i] = dot(x_[i], x_[i]);
    }
    diag_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) diag_[i] = eval(i, i);

    const std::size_t full_bytes = n_ * n_ * sizeof(double);
    if (full_bytes <= kCacheBudget) {
      full_.resize(n_ * n_);
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j <= i; ++j)
          full_[i * n_ + j] = full_[j * n_ + i] = eval(i, j);
      return;
    }
    rows_.assign(n_, nullptr);
    slots_.resize(std::max<std::size_t>(2, kCacheBudget / (n_ * sizeof(double))));
    storage_.resize(slots_.size() * n_);
    for (std::size_t s = 0; s < slots_.size(); ++s)
      slots_[s] = Slot{&storage_[s * n_], SIZE_MAX};
  }

  double diag(std::size_t i) const { return diag_[i]; }

  const double* row(std::size_t i) {
    if (!full_.empty()) return &full_[i * n_];
    if (rows_[i]) {
      lru_.splice(lru_.end(), lru_, iters_[owner_of(i)]);
      return rows_[i];
    }
    // Evict the least-recently-used slot (or claim a fresh one).
    std::size_t s;
    if (used_ < slots_.size()) {
      s = used_++;
      lru_.push_back(s);
    } else {
      s = lru_.front();
      lru_.splice(lru_.end(), lru_, lru_.begin());
      rows_[slots_[s].owner] = nullptr;
    }
    iters_.resize(std::max(iters_.size(), s + 1));
    iters_[s] = std::prev(lru_.end());
    slots_[s].owner = i;
    double* out = slots_[s].data;
    for (std::size_t j = 0; j < n_; ++j) out[j] = eval(i, j);
    rows_[i] = out;
    return out;
  }

 private:
  static constexpr std::size_t kCacheBudget = 320ull << 20;  // bytes

  struct Slot {
    double* data = nullptr;
    std::size_t owner = SIZE_MAX;
  };

  std::size_t owner_of(std::size_t i) const {
    // rows_[i] points into storage_, slot index recoverable from the offset
    return static_cast<std::size_t>(rows_[i] - storage_.data()) / n_;
  }

  double eval(std::size_t i, std::size_t j) const {
    if (kernel_.kind == KernelKind::Poly2) {
      const double t = 1.0 + dot(x_[i], x_[j]);
      return t * t;
    }
    const double d2 = std::max(0.0, norms_[i] + norms_[j] - 2.0 * dot(x_[i], x_[j]));
    return std::exp(-d2 / (2.0 * kernel_.scale * kernel_.scale));
  }

  const std::vector<FeatureVector>& x_;
  KernelSpec kernel_;
  std::size_t n_;
  std::vector<double> norms_, diag_;
  std::vector<double> full_;  // n x n when it fits the budget

  std::vector<const double*> rows_;           // per sample: cached row or null
  std::vector<Slot> slots_;                   // fixed row slots
  std::vector<double> storage_;               // slot backing store
  std::list<std::size_t> lru_;                // slot indices, LRU first
  std::vector<std::list<std::size_t>::iterator> iters_;  // per slot
  std::size_t used_ = 0;
};

}  // namespace

BinaryModel train_binary(const std::vector<FeatureVector>& x, const std::vector<int>& y,
                         const KernelSpec& kernel, const TrainOptions& opt) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n)
    throw DimensionMismatch("train_binary: empty set or label count mismatch");
  const std::size_t dim = x.front().size();
  for (const auto& f : x)
    if (f.size() != dim) throw DimensionMismatch("train_binary: ragged features");
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v == +1)
      has_pos = true;
    else if (v == -1)
      has_neg = true;
    else
      throw InvalidConfig("train_binary: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg)
    throw SingleClassData("train_binary: both labels must be present");
  if (!(opt.c > 0.0) || !(opt.tol > 0.0))
    throw InvalidConfig("train_binary: c and tol must be positive");
  if (kernel.kind == KernelKind::Rbf && !(kernel.scale > 0.0))
    throw InvalidConfig("train_binary: rbf kernel requires a positive scale");

  const double c = opt.c;
  KernelCache cache(x, kernel);

  // Dual: min 1/2 a^T Q a - e^T a, 0 <= a <= C, y^T a = 0, Q_ij = y_i y_j K_ij.
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of the dual objective
  const std::size_t max_iter =
      opt.max_iter ? opt.max_iter : std::max<std::size_t>(200000, 30 * n);

  bool converged = false;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // Maximal-violating pair (first-order selection, lowest index on ties).
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t i = SIZE_MAX, j = SIZE_MAX;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      const bool in_up = y[t] > 0 ? alpha[t] < c : alpha[t] > 0.0;
      const bool in_low = y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < c;
      if (in_up && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i == SIZE_MAX || j == SIZE_MAX || gmax - gmin <= opt.tol) {
      converged = true;
      break;
    }

    const double* ki = cache.row(i);
    const double* kj = cache.row(j);
    const double old_ai = alpha[i], old_aj = alpha[j];

    // Two-variable subproblem along the equality constraint.
    if (y[i] != y[j]) {
      double quad = cache.diag(i) + cache.diag(j) + 2.0 * ki[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else {
        if (alpha[i] < 0.0) {
          alpha[i] = 0.0;
          alpha[j] = -diff;
        }
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = c + diff;
        }
      }
    } else {
      double quad = cache.diag(i) + cache.diag(j) - 2.0 * ki[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = sum;
        }
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else {
        if (alpha[i] < 0.0) {
          alpha[i] = 0.0;
          alpha[j] = sum;
        }
      }
    }

    const double di = y[i] * (alpha[i] - old_ai);
    const double dj = y[j] * (alpha[j] - old_aj);
    for (std::size_t t = 0; t < n; ++t)
      grad[t] += y[t] * (di * ki[t] + dj * kj[t]);
  }

  // Bias from the KKT conditions: average over free vectors, midpoint of the
  // feasibility interval when none are free.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t nr_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double g = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] > 0)
        lb = std::max(lb, g);
      else
        ub = std::min(ub, g);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0)
        ub = std::min(ub, g);
      else
        lb = std::max(lb, g);
    } else {
      ++nr_free;
      sum_free += g;
    }
  }
  const double rho = nr_free ? sum_free / static_cast<double>(nr_free) : 0.5 * (ub + lb);

  BinaryModel model;
  model.kernel = kernel;
  model.bias = -rho;
  model.converged = converged;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support_vectors.push_back(x[t]);
      model.weights.push_back(alpha[t] * y[t]);
    }
  }
  return model;
}

}  // namespace svmrx
