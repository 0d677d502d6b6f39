#include "svmrx/selftest.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <vector>

#include "svmrx/harness.hpp"
#include "svmrx/rng.hpp"

// Every check here recomputes its expected answer along a route that shares
// no code with the production path: dense LU elimination instead of
// Cholesky, closed-form eigenvalues, the full Gaussian likelihood instead of
// the reduced metric, Monte Carlo instead of closed-form covariance, and a
// projected-gradient QP solver instead of SMO.

namespace svmrx::selftest {

namespace {

using svmrx::Complex;

// ---------------------------------------------------------------------------
// Dense complex LU with partial pivoting (the elimination oracle).

struct Lu {
  std::vector<std::vector<Complex>> a;
  std::vector<std::size_t> perm;
  double sign = 1.0;
  bool singular = false;
};

Lu lu_decompose(std::vector<std::vector<Complex>> a) {
  const std::size_t n = a.size();
  Lu lu;
  lu.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) lu.perm[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    if (std::abs(a[piv][k]) == 0.0) {
      lu.singular = true;
      break;
    }
    if (piv != k) {
      std::swap(a[piv], a[k]);
      std::swap(lu.perm[piv], lu.perm[k]);
      lu.sign = -lu.sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = a[i][k] / a[k][k];
      a[i][k] = f;
      for (std::size_t j = k + 1; j < n; ++j) a[i][j] -= f * a[k][j];
    }
  }
  lu.a = std::move(a);
  return lu;
}

std::vector<Complex> lu_solve(const Lu& lu, const std::vector<Complex>& b) {
  const std::size_t n = b.size();
  std::vector<Complex> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[lu.perm[i]];
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= lu.a[i][j] * x[j];
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= lu.a[ii][j] * x[j];
    x[ii] /= lu.a[ii][ii];
  }
  return x;
}

Complex lu_det(const Lu& lu) {
  if (lu.singular) return 0.0;
  Complex d = lu.sign;
  for (std::size_t i = 0; i < lu.a.size(); ++i) d *= lu.a[i][i];
  return d;
}

std::vector<std::vector<Complex>> to_rows(const HermitianMatrix& m) {
  std::vector<std::vector<Complex>> rows(m.dim(), std::vector<Complex>(m.dim()));
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) rows[i][j] = m.at(i, j);
  return rows;
}

// y^H A^{-1} y through the elimination inverse.
double quad_form_oracle(const HermitianMatrix& a, const CVector& y) {
  const Lu lu = lu_decompose(to_rows(a));
  const std::vector<Complex> x = lu_solve(lu, std::vector<Complex>(y.begin(), y.end()));
  Complex acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += std::conj(y[i]) * x[i];
  return acc.real();
}

// ---------------------------------------------------------------------------
// Closed-form eigenvalues of a 3x3 Hermitian matrix (trigonometric method).

std::array<double, 3> eig3(const HermitianMatrix& m) {
  const double a00 = m.at(0, 0).real(), a11 = m.at(1, 1).real(), a22 = m.at(2, 2).real();
  const double p1 =
      std::norm(m.at(0, 1)) + std::norm(m.at(0, 2)) + std::norm(m.at(1, 2));
  const double q = (a00 + a11 + a22) / 3.0;
  if (p1 == 0.0) return {a00, a11, a22};
  const double p2 = (a00 - q) * (a00 - q) + (a11 - q) * (a11 - q) +
                    (a22 - q) * (a22 - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);

  // B = (A - qI) / p; r = det(B) / 2 is real for Hermitian input.
  auto b = [&](std::size_t i, std::size_t j) {
    Complex v = m.at(i, j);
    if (i == j) v -= q;
    return v / p;
  };
  const Complex det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                      b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                      b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
  const double r = std::clamp(det.real() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  return {e1, 3.0 * q - e1 - e3, e3};
}

HermitianMatrix random_hpd(std::size_t n, Rng& rng) {
  // B^H B + I/2: comfortably positive definite.
  ComplexMatrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = rng.complex_gaussian(1.0);
  const ComplexMatrix g = b.adjoint() * b;
  return HermitianMatrix::build(n, [&](std::size_t i, std::size_t j) {
    Complex v = g(i, j);
    if (i == j) v += 0.5;
    return v;
  });
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------

CheckResult check_numerics() {
  CheckResult res{"numerics-elimination-oracle", false, ""};
  Rng rng(0xabc001);
  double worst = 0.0;

  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const HermitianMatrix a = random_hpd(n, rng);
    CVector y(n);
    for (auto& v : y) v = rng.complex_gaussian(1.0);

    // Solve against elimination.
    const CVector x = hermitian_solve(a, y);
    const auto x_ref =
        lu_solve(lu_decompose(to_rows(a)), std::vector<Complex>(y.begin(), y.end()));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += std::norm(x[i] - x_ref[i]);
      den += std::norm(x_ref[i]);
    }
    worst = std::max(worst, std::sqrt(num / den));

    // Quadratic form against the elimination inverse.
    const double qf = quadratic_form(a, y);
    const double qf_ref = quad_form_oracle(a, y);
    worst = std::max(worst, std::abs(qf - qf_ref) / std::abs(qf_ref));

    // log-determinant against the elimination determinant.
    const double ld = log_det(a);
    const double ld_ref = std::log(std::abs(lu_det(lu_decompose(to_rows(a)))));
    worst = std::max(worst, std::abs(ld - ld_ref) / std::max(1.0, std::abs(ld_ref)));
  }

  // log-determinant against closed-form 3x3 eigenvalues.
  for (int trial = 0; trial < 20; ++trial) {
    const HermitianMatrix a = random_hpd(3, rng);
    const auto ev = eig3(a);
    const double ld_ref = std::log(ev[0]) + std::log(ev[1]) + std::log(ev[2]);
    worst = std::max(worst, std::abs(log_det(a) - ld_ref) / std::abs(ld_ref));
  }

  res.passed = worst < 1e-9;
  res.detail = "max relative error " + fmt(worst);
  return res;
}

CheckResult check_ml_likelihood() {
  CheckResult res{"ml-full-likelihood-oracle", false, ""};
  FadingParams p;
  p.alpha = 0.95;
  p.sigma_h2 = 1.0;
  p.sigma_w2 = snr_to_noise_var(1.0, 10.0);
  const double power = 1.0;
  const CVector pilots = build_frame(InfoWord(0), power).pilots;
  const HypothesisTables tables(pilots, p, power);

  // Independent per-class covariance and full log-likelihood.
  std::vector<std::vector<std::vector<Complex>>> sigma(kNumClasses);
  std::vector<double> logdet(kNumClasses);
  for (unsigned cls = 0; cls < kNumClasses; ++cls) {
    const auto data = bpsk_modulate(hamming_encode(InfoWord(cls)), power);
    CVector x;  // newest-first, same convention the detector documents
    x.insert(x.end(), pilots.rbegin(), pilots.rend());
    x.insert(x.end(), data.rbegin(), data.rend());
    x.insert(x.end(), pilots.rbegin(), pilots.rend());
    std::vector<std::vector<Complex>> s(kWindowLen, std::vector<Complex>(kWindowLen));
    for (std::size_t m = 0; m < kWindowLen; ++m)
      for (std::size_t n = 0; n < kWindowLen; ++n) {
        const double lag = m > n ? double(m - n) : double(n - m);
        s[m][n] = x[m] * std::conj(x[n]) * p.sigma_h2 * std::pow(p.alpha, lag);
        if (m == n) s[m][n] += p.sigma_w2;
      }
    logdet[cls] = std::log(std::abs(lu_det(lu_decompose(s))));
    sigma[cls] = std::move(s);
  }

  const double spread = *std::max_element(logdet.begin(), logdet.end()) -
                        *std::min_element(logdet.begin(), logdet.end());
  if (spread > 1e-8) {
    res.detail = "log-det spread across hypotheses " + fmt(spread);
    return res;
  }

  FrameStream stream(p, power, 0xbeef01);
  std::size_t mismatches = 0;
  for (int f = 0; f < 500; ++f) {
    const FrameItem item = stream.next();
    const CVector y = assemble_window(item.window);
    unsigned best = 0;
    double best_metric = 0.0;
    for (unsigned cls = 0; cls < kNumClasses; ++cls) {
      const Lu lu = lu_decompose(sigma[cls]);
      const auto x = lu_solve(lu, std::vector<Complex>(y.begin(), y.end()));
      Complex q = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) q += std::conj(y[i]) * x[i];
      const double metric = logdet[cls] + q.real();  // -2x the log-likelihood + const
      if (cls == 0 || metric < best_metric) {
        best_metric = metric;
        best = cls;
      }
    }
    if (InfoWord(best) != ml_decode(item.window, tables)) ++mismatches;
  }

  res.passed = mismatches == 0;
  res.detail = std::to_string(mismatches) + "/500 decisions differ; log-det spread " +
               fmt(spread);
  return res;
}

CheckResult check_kalman_lmmse() {
  CheckResult res{"kalman-lmmse-frame0", false, ""};
  FadingParams p;
  p.alpha = 0.97;
  p.sigma_h2 = 1.0;
  p.sigma_w2 = snr_to_noise_var(1.0, 15.0);
  const CVector pilots = build_frame(InfoWord(0), 1.0).pilots;

  FrameStream stream(p, 1.0, 0xfeed02);
  double worst = 0.0;
  for (int f = 0; f < 10; ++f) {
    const FrameItem item = stream.next();
    const ChannelEstimate lm = lmmse_estimate(item.window, pilots, p);
    KalmanState state = make_kalman_state(p);
    const ChannelEstimate ka = kalman_update(state, item.window, pilots, p);
    for (std::size_t d = 0; d < kWindowLen; ++d)
      worst = std::max(worst, std::abs(lm.h_hat[d] - ka.h_hat[d]));
  }
  res.passed = worst < 1e-9;
  res.detail = "max |lmmse - kalman| at frame 0: " + fmt(worst);
  return res;
}

CheckResult check_fading_autocorr() {
  CheckResult res{"fading-autocorrelation", false, ""};
  FadingParams p;
  p.alpha = 0.9;
  p.sigma_h2 = 1.0;
  p.sigma_w2 = 0.0;

  constexpr std::size_t kSamples = 1000000;
  constexpr std::size_t kMaxLag = 3;
  FadingState state = make_fading_state(p, 0x5eed03);
  std::vector<Complex> h(kSamples);
  h[0] = state.h;
  for (std::size_t t = 1; t < kSamples; ++t) h[t] = step_fading(state, p);

  double worst = 0.0;
  for (std::size_t lag = 0; lag <= kMaxLag; ++lag) {
    Complex acc = 0.0;
    for (std::size_t t = 0; t + lag < kSamples; ++t) acc += h[t + lag] * std::conj(h[t]);
    const double est = acc.real() / static_cast<double>(kSamples - lag);
    const double want = p.sigma_h2 * std::pow(p.alpha, static_cast<double>(lag));
    worst = std::max(worst, std::abs(est - want));
  }
  res.passed = worst < 0.01;
  res.detail = "max |empirical - alpha^k| over lags 0..3: " + fmt(worst);
  return res;
}

// ---------------------------------------------------------------------------
// Projected-gradient oracle for the SVM dual.

double dual_objective(const std::vector<std::vector<double>>& q,
                      const std::vector<double>& a) {
  const std::size_t n = a.size();
  double obj = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < n; ++j) dot += q[i][j] * a[j];
    obj += 0.5 * a[i] * dot - a[i];
  }
  return obj;
}

// Euclidean projection onto {0 <= a <= C, y^T a = 0} by bisection on the
// multiplier of the equality constraint.
std::vector<double> project(const std::vector<double>& v, const std::vector<int>& y,
                            double c) {
  const std::size_t n = v.size();
  double radius = c + 1.0;
  for (double vi : v) radius = std::max(radius, std::abs(vi) + c + 1.0);
  double lo = -radius, hi = radius;
  std::vector<double> a(n);
  for (int it = 0; it < 200; ++it) {
    const double lambda = 0.5 * (lo + hi);
    double balance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ai = std::clamp(v[i] - lambda * y[i], 0.0, c);
      a[i] = ai;
      balance += y[i] * ai;
    }
    if (balance > 0.0)
      lo = lambda;
    else
      hi = lambda;
  }
  return a;
}

double pg_dual_optimum(const std::vector<std::vector<double>>& q,
                       const std::vector<int>& y, double c) {
  const std::size_t n = y.size();
  double lips = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(q[i][j]);
    lips = std::max(lips, row);
  }
  const double step = 1.0 / lips;

  std::vector<double> a(n, 0.0), v(n), grad(n);
  double prev = 0.0;
  for (std::size_t it = 0; it < 1000000; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += q[i][j] * a[j];
      grad[i] = dot - 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = a[i] - step * grad[i];
    a = project(v, y, c);
    if (it % 1000 == 999) {
      const double obj = dual_objective(q, a);
      if (std::abs(prev - obj) < 1e-12) break;
      prev = obj;
    }
  }
  return dual_objective(q, a);
}

CheckResult check_smo_qp() {
  CheckResult res{"smo-projected-gradient-oracle", false, ""};
  Rng rng(0xdead04);

  // Two overlapping Gaussian clusters in 4-D, 16 points each.
  std::vector<FeatureVector> x;
  std::vector<int> y;
  for (int i = 0; i < 32; ++i) {
    const int label = i < 16 ? +1 : -1;
    FeatureVector f(4);
    for (auto& v : f) v = rng.complex_gaussian(1.0).real() + 0.8 * label;
    x.push_back(std::move(f));
    y.push_back(label);
  }

  double worst = 0.0;
  for (KernelKind kind : {KernelKind::Rbf, KernelKind::Poly2}) {
    const KernelSpec kernel{kind, 2.0};
    TrainOptions opt;
    opt.c = 1.0;
    opt.tol = 1e-4;  // tight, so the SMO side sits at its optimum
    const BinaryModel model = train_binary(x, y, kernel, opt);

    // Recover alpha from the model (weights = alpha * y on support vectors).
    std::vector<double> alpha(x.size(), 0.0);
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < x.size() && cursor < model.support_vectors.size(); ++i) {
      if (x[i] == model.support_vectors[cursor]) {
        alpha[i] = model.weights[cursor] * y[i];
        ++cursor;
      }
    }
    if (cursor != model.support_vectors.size()) {
      res.detail = "could not align support vectors with training points";
      return res;
    }

    std::vector<std::vector<double>> q(x.size(), std::vector<double>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < x.size(); ++j)
        q[i][j] = y[i] * y[j] * kernel_eval(kernel, x[i], x[j]);

    const double smo_obj = dual_objective(q, alpha);
    const double pg_obj = pg_dual_optimum(q, y, opt.c);
    worst = std::max(worst, std::abs(smo_obj - pg_obj));
  }

  res.passed = worst < 1e-3;
  res.detail = "max |dual(SMO) - dual(PG)| " + fmt(worst);
  return res;
}

CheckResult check_phy_and_csv() {
  CheckResult res{"hamming-and-csv-determinism", false, ""};

  // Hamming(7,4): round trip, single-error correction, linearity, distance.
  for (unsigned a = 0; a < kNumClasses; ++a) {
    const Codeword ca = hamming_encode(InfoWord(a));
    if (hamming_decode_hard(ca.bits) != InfoWord(a)) {
      res.detail = "round trip failed for word " + std::to_string(a);
      return res;
    }
    for (std::size_t pos = 0; pos < kCodedBits; ++pos) {
      auto corrupted = ca.bits;
      corrupted[pos] ^= 1;
      if (hamming_decode_hard(corrupted) != InfoWord(a)) {
        res.detail = "single-error correction failed at word " + std::to_string(a) +
                     " bit " + std::to_string(pos);
        return res;
      }
    }
    for (unsigned b = 0; b < kNumClasses; ++b) {
      const Codeword cb = hamming_encode(InfoWord(b));
      const Codeword cx = hamming_encode(InfoWord(a ^ b));
      int dist = 0;
      for (std::size_t t = 0; t < kCodedBits; ++t) {
        if ((ca.bits[t] ^ cb.bits[t]) != cx.bits[t]) {
          res.detail = "linearity failed";
          return res;
        }
        dist += ca.bits[t] ^ cb.bits[t];
      }
      if (a != b && dist < 3) {
        res.detail = "minimum distance violated";
        return res;
      }
    }
  }

  // Identical CSV bytes from serial and multi-worker sweeps.
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path();
  auto csv_path = [&](int k) {
    return (dir / ("svmrx-selftest-" + std::to_string(::getpid()) + "-" +
                   std::to_string(k) + ".csv"))
        .string();
  };

  ExperimentConfig cfg;
  cfg.alphas = {0.9, 0.99};
  cfg.snrs_db = {5, 15};
  cfg.receivers = {"ml", "mmse"};
  cfg.frames_eval = 300;
  cfg.seed = 7;

  std::string bytes[3];
  const unsigned worker_counts[3] = {1, 3, 1};
  for (int k = 0; k < 3; ++k) {
    cfg.workers = worker_counts[k];
    cfg.output = csv_path(k);
    run_sweep(cfg);
    std::ifstream in(cfg.output, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    bytes[k] = ss.str();
    fs::remove(cfg.output);
  }

  const bool csv_ok = !bytes[0].empty() && bytes[0] == bytes[1] && bytes[0] == bytes[2];
  res.passed = csv_ok;
  res.detail = csv_ok ? "16 words exhaustive; serial == 3-worker == rerun bytes"
                      : "CSV bytes differ between worker counts";
  return res;
}

}  // namespace

std::vector<CheckResult> run_all() {
  const std::function<CheckResult()> checks[] = {
      check_numerics,     check_ml_likelihood, check_kalman_lmmse,
      check_fading_autocorr, check_smo_qp,     check_phy_and_csv,
  };
  std::vector<CheckResult> out;
  for (const auto& c : checks) {
    try {
      out.push_back(c());
    } catch (const std::exception& e) {
      out.push_back({"(exception)", false, e.what()});
    }
  }
  return out;
}

bool run_and_report(std::ostream& out) {
  bool all = true;
  for (const auto& r : run_all()) {
    out << (r.passed ? "PASS" : "FAIL") << "  " << r.name << ": " << r.detail << '\n';
    all = all && r.passed;
  }
  return all;
}

}  // namespace svmrx::selftest
