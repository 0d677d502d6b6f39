#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <doctest.h>

#include "svmrx/channel.hpp"
#include "svmrx/errors.hpp"
#include "svmrx/harness.hpp"
#include "svmrx/numerics.hpp"
#include "svmrx/phy.hpp"
#include "svmrx/rx_conventional.hpp"
#include "test_util.hpp"

using namespace svmrx;
using testutil::gj_inverse;
using testutil::max_abs_diff;
using testutil::quad_via;

namespace {

CVector unit_pilots(double power) { return CVector(kPilotLen, std::sqrt(power)); }

// Independent construction of the internal (newest-first) window vector:
// [r_next reversed; z reversed; r_cur reversed].
CVector window_oracle(const FrameWindow& w) {
  CVector y;
  for (std::size_t k = 0; k < kPilotLen; ++k) y.push_back(w.r_next[kPilotLen - 1 - k]);
  for (std::size_t k = 0; k < kDataLen; ++k) y.push_back(w.z[kDataLen - 1 - k]);
  for (std::size_t k = 0; k < kPilotLen; ++k) y.push_back(w.r_cur[kPilotLen - 1 - k]);
  return y;
}

// Hypothesis symbols in the same internal order.
CVector symbols_oracle(unsigned cls, double power) {
  const auto data = bpsk_modulate(hamming_encode(InfoWord(cls)), power);
  CVector x;
  for (std::size_t k = 0; k < kPilotLen; ++k) x.push_back(std::sqrt(power));
  for (std::size_t k = 0; k < kDataLen; ++k) x.push_back(data[kDataLen - 1 - k]);
  for (std::size_t k = 0; k < kPilotLen; ++k) x.push_back(std::sqrt(power));
  return x;
}

// Per-class window covariance built entrywise from the model definition.
// Internal slot k corresponds to time (kWindowLen - 1 - k), so the fading
// term stays Toeplitz in |m - n| in this order too.
HermitianMatrix sigma_oracle(unsigned cls, const FadingParams& p, double power) {
  const CVector x = symbols_oracle(cls, power);
  return HermitianMatrix::build(kWindowLen, [&](std::size_t m, std::size_t n) {
    Complex v = x[m] * std::conj(x[n]) *
                (p.sigma_h2 * std::pow(p.alpha, double(m) - double(n)));
    if (m == n) v += p.sigma_w2;
    return v;
  });
}

std::vector<FrameItem> stream_items(const FadingParams& p, double power,
                                    std::size_t count, std::uint64_t seed) {
  return generate_stream(p, power, count, seed);
}

}  // namespace

TEST_SUITE("rx_conventional") {

TEST_CASE("assemble_window reverses each block, newest block first") {
  FrameWindow w;
  w.r_cur = {Complex{1.0, 0.5}};
  w.r_next = {Complex{9.0, -1.0}};
  for (int k = 0; k < int(kDataLen); ++k) w.z.push_back(Complex{double(k + 2), 0.0});
  const CVector y = assemble_window(w);
  REQUIRE(y.size() == kWindowLen);
  CHECK(y[0] == w.r_next[0]);
  for (std::size_t k = 0; k < kDataLen; ++k) CHECK(y[1 + k] == w.z[kDataLen - 1 - k]);
  CHECK(y[kWindowLen - 1] == w.r_cur[0]);
  CHECK(y == window_oracle(w));
}

TEST_CASE("assemble_window validates block sizes") {
  FrameWindow w;
  w.r_cur = {Complex{1.0}};
  w.r_next = {Complex{1.0}};
  w.z = CVector(kDataLen - 1);
  CHECK_THROWS_AS(assemble_window(w), DimensionMismatch);
  w.z = CVector(kDataLen);
  w.r_next.clear();
  CHECK_THROWS_AS(assemble_window(w), DimensionMismatch);
}

TEST_CASE("hypothesis tables: symbols, covariance, and equal log-dets") {
  FadingParams p{0.95, 1.0, snr_to_noise_var(1.0, 10.0)};
  const double power = 1.0;
  const HypothesisTables tables(unit_pilots(power), p, power);
  REQUIRE(tables.dim() == kWindowLen);

  double lo = tables.log_det(0), hi = tables.log_det(0);
  for (unsigned cls = 0; cls < kNumClasses; ++cls) {
    const CVector expect_x = symbols_oracle(cls, power);
    CHECK(max_abs_diff(tables.symbol_vector(cls), expect_x) == 0.0);

    // The stored factor reconstructs the model covariance.
    const ComplexMatrix rebuilt =
        tables.factor(cls).lower() * tables.factor(cls).lower().adjoint();
    CHECK(max_abs_diff(rebuilt, sigma_oracle(cls, p, power).matrix()) < 1e-10);

    lo = std::min(lo, tables.log_det(cls));
    hi = std::max(hi, tables.log_det(cls));
  }
  // Constant-modulus signalling: every hypothesis has the same determinant.
  CHECK(hi - lo < 1e-8);
}

TEST_CASE("hypothesis tables validate their inputs") {
  FadingParams p{0.95, 1.0, 0.1};
  CHECK_THROWS_AS(HypothesisTables(CVector(kPilotLen + 1, 1.0), p, 1.0),
                  DimensionMismatch);
  CHECK_THROWS_AS(HypothesisTables(unit_pilots(1.0), p, 0.0), InvalidConfig);
  FadingParams bad = p;
  bad.alpha = 2.0;
  CHECK_THROWS_AS(HypothesisTables(unit_pilots(1.0), bad, 1.0), InvalidConfig);
}

TEST_CASE("ml_decode matches a brute-force likelihood search") {
  const double power = 1.0;
  FadingParams p{0.95, 1.0, snr_to_noise_var(power, 10.0)};
  const HypothesisTables tables(unit_pilots(power), p, power);

  // Oracle: explicit inverse of the independently built covariance per class.
  std::vector<ComplexMatrix> inv;
  for (unsigned cls = 0; cls < kNumClasses; ++cls)
    inv.push_back(gj_inverse(sigma_oracle(cls, p, power).matrix()));

  const auto items = stream_items(p, power, 200, 424242);
  std::size_t compared = 0;
  for (const FrameItem& it : items) {
    const CVector y = window_oracle(it.window);
    unsigned best = 0;
    double best_m = quad_via(inv[0], y), runner = 1e300;
    for (unsigned cls = 1; cls < kNumClasses; ++cls) {
      const double m = quad_via(inv[cls], y);
      if (m < best_m) {
        runner = best_m;
        best_m = m;
        best = cls;
      } else {
        runner = std::min(runner, m);
      }
    }
    // Skip knife-edge frames where floating-point routes could disagree.
    if (runner - best_m < 1e-6 * std::abs(best_m)) continue;
    ++compared;
    CHECK(ml_decode(it.window, tables).index() == best);
  }
  CHECK(compared > 150);  // the guard must not eat the test
}

TEST_CASE("ml_decode recovers the truth on a benign channel") {
  const double power = 1.0;
  FadingParams p{1.0, 1.0, snr_to_noise_var(power, 40.0)};
  const HypothesisTables tables(unit_pilots(power), p, power);
  for (const FrameItem& it : stream_items(p, power, 100, 7)) {
    CHECK(ml_decode(it.window, tables) == it.truth);
  }
}

TEST_CASE("lmmse_estimate matches directly solved normal equations") {
  const double power = 2.0;
  FadingParams p{0.97, 1.5, 0.2};
  const CVector pilots = unit_pilots(power);
  const double amp = std::sqrt(power);

  // Transmission-order time of each window slot; pilots sit at the edges.
  const std::size_t t_cur = 0, t_next = kFrameLen;
  auto rho = [&](double lag) { return p.sigma_h2 * std::pow(p.alpha, std::abs(lag)); };

  // 2x2 pilot-observation covariance and its explicit inverse.
  ComplexMatrix srr(2, 2);
  srr(0, 0) = srr(1, 1) = power * rho(0) + p.sigma_w2;
  srr(0, 1) = srr(1, 0) = power * rho(double(t_next) - double(t_cur));
  const ComplexMatrix srr_inv = gj_inverse(srr);

  for (const FrameItem& it : stream_items(p, power, 25, 99)) {
    const ChannelEstimate est = lmmse_estimate(it.window, pilots, p);
    REQUIRE(est.h_hat.size() == kWindowLen);
    CHECK(est.source == ChannelEstimate::Source::Lmmse);
    const CVector obs{it.window.r_cur[0], it.window.r_next[0]};
    for (std::size_t m = 0; m < kWindowLen; ++m) {
      // Cross covariance of slot m with the two pilot observations.
      const CVector cross{amp * rho(double(m) - double(t_cur)),
                          amp * rho(double(m) - double(t_next))};
      Complex expect = 0.0;
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
          expect += cross[i] * srr_inv(i, j) * obs[j];
      CHECK(std::abs(est.h_hat[m] - expect) < 1e-10);
    }
  }
}

TEST_CASE("build_lmmse_gain agrees with lmmse_estimate") {
  const double power = 1.0;
  FadingParams p{0.95, 1.0, 0.1};
  const CVector pilots = unit_pilots(power);
  const ComplexMatrix w = build_lmmse_gain(pilots, p);
  REQUIRE(w.rows() == kWindowLen);
  REQUIRE(w.cols() == 2 * kPilotLen);
  for (const FrameItem& it : stream_items(p, power, 10, 5)) {
    CVector stack = it.window.r_cur;
    stack.insert(stack.end(), it.window.r_next.begin(), it.window.r_next.end());
    const CVector direct = w * stack;
    const ChannelEstimate est = lmmse_estimate(it.window, pilots, p);
    CHECK(max_abs_diff(direct, est.h_hat) == 0.0);
  }
}

TEST_CASE("lmmse error is orthogonal to the observations") {
  const double power = 1.0;
  FadingParams p{0.95, 1.0, 0.1};
  const CVector pilots = unit_pilots(power);
  const MmseReceiver rx(pilots, p);

  const std::size_t frames = 20000;
  const auto items = stream_items(p, power, frames + 1, 314159);
  ComplexMatrix acc(kWindowLen, 2);  // E{(h - h_hat) * conj(r_obs)}
  for (std::size_t i = 0; i < frames; ++i) {
    const ChannelEstimate est = rx.estimate(items[i].window);
    const CVector obs{items[i].window.r_cur[0], items[i].window.r_next[0]};
    for (std::size_t m = 0; m < kWindowLen; ++m) {
      // True gain of slot m: the current frame's gains then the next pilot's.
      const Complex h_m =
          m < kFrameLen ? items[i].h_true[m] : items[i + 1].h_true[m - kFrameLen];
      const Complex err = h_m - est.h_hat[m];
      for (std::size_t j = 0; j < 2; ++j) acc(m, j) += err * std::conj(obs[j]);
    }
  }
  acc *= 1.0 / double(frames);
  for (std::size_t m = 0; m < kWindowLen; ++m)
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(acc(m, j)) < 0.03);
}

TEST_CASE("kalman first update coincides with the one-shot lmmse") {
  const double power = 1.0;
  FadingParams p{0.97, 1.0, snr_to_noise_var(power, 15.0)};
  const CVector pilots = unit_pilots(power);
  for (const FrameItem& it : stream_items(p, power, 5, 2025)) {
    KalmanState s = make_kalman_state(p);
    const ChannelEstimate kal = kalman_update(s, it.window, pilots, p);
    const ChannelEstimate mmse = lmmse_estimate(it.window, pilots, p);
    CHECK(kal.source == ChannelEstimate::Source::Kalman);
    CHECK(max_abs_diff(kal.h_hat, mmse.h_hat) < 1e-9);
    CHECK(s.frame_index == 1);
  }
}

TEST_CASE("kalman predict preserves the stationary law") {
  for (double alpha : {0.9, 0.97, 0.99}) {
    FadingParams p{alpha, 1.3, 0.1};
    KalmanState s = make_kalman_state(p);
    const HermitianMatrix stationary = fading_covariance(kWindowLen, p);
    CHECK(max_abs_diff(s.cov.matrix(), stationary.matrix()) == 0.0);
    for (int step = 0; step < 3; ++step) {
      kalman_predict(s, p);
      for (const Complex& m : s.mean) CHECK(std::abs(m) == 0.0);
      CHECK(max_abs_diff(s.cov.matrix(), stationary.matrix()) < 1e-9);
    }
  }
}

TEST_CASE("kalman update with overwhelming noise keeps the prior") {
  const double power = 1.0;
  FadingParams p{0.95, 1.0, 1e12};
  const CVector pilots = unit_pilots(power);
  const auto items = stream_items(p, power, 1, 8);
  KalmanState s = make_kalman_state(p);
  const HermitianMatrix prior = s.cov;
  kalman_update(s, items[0].window, pilots, p);
  for (const Complex& m : s.mean) CHECK(std::abs(m) < 1e-4);
  CHECK(max_abs_diff(s.cov.matrix(), prior.matrix()) < 1e-6);
}

TEST_CASE("kalman error covariance shrinks against the lmmse baseline") {
  // After many tracked frames the filter has pilot history that the two-pilot
  // one-shot estimator lacks, so its posterior variance on the data slots
  // must be no larger.
  const double power = 1.0;
  FadingParams p{0.97, 1.0, snr_to_noise_var(power, 10.0)};
  const CVector pilots = unit_pilots(power);

  KalmanState s = make_kalman_state(p);
  const auto items = stream_items(p, power, 60, 17);
  for (const FrameItem& it : items) {
    if (s.frame_index > 0) kalman_predict(s, p);
    kalman_update(s, it.window, pilots, p);
  }
  // One-shot posterior covariance: Sigma_hh - W Sigma_rh.
  const ComplexMatrix w = build_lmmse_gain(pilots, p);
  const HermitianMatrix sigma_h = fading_covariance(kWindowLen, p);
  const double amp = std::sqrt(power);
  ComplexMatrix sigma_rh(2, kWindowLen);
  for (std::size_t k = 0; k < 2; ++k) {
    const std::size_t slot = k == 0 ? 0 : kFrameLen;
    for (std::size_t m = 0; m < kWindowLen; ++m)
      sigma_rh(k, m) = amp * sigma_h.at(slot, m);
  }
  ComplexMatrix post = sigma_h.matrix();
  post -= w * sigma_rh;
  // Compare marginal variances on the data slots (reversed order in state).
  for (std::size_t m = 0; m < kWindowLen; ++m) {
    const double kal_var = s.cov.at(m, m).real();
    const double mmse_var = post(kWindowLen - 1 - m, kWindowLen - 1 - m).real();
    CHECK(kal_var <= mmse_var + 1e-9);
  }
}

TEST_CASE("equalize inverts the gain and respects the dead zone") {
  const Complex two_i{0.0, 2.0};
  const CVector z{two_i * Complex{3.0, 1.0}, Complex{5.0, 0.0}, Complex{1.0, 1.0}};
  const CVector h{two_i, Complex{1.0, 0.0}, Complex{}};
  const CVector eq = equalize(z, h);
  REQUIRE(eq.size() == 3);
  CHECK(std::abs(eq[0] - Complex{3.0, 1.0}) < 1e-12);
  CHECK(eq[1] == Complex{5.0, 0.0});
  CHECK(eq[2] == Complex{});  // dead zone instead of a division by zero
  CHECK_THROWS_AS(equalize(z, CVector(2)), DimensionMismatch);
}

TEST_CASE("estimator receivers decode cleanly on a benign channel") {
  const double power = 1.0;
  FadingParams p{1.0, 1.0, snr_to_noise_var(power, 40.0)};
  const CVector pilots = unit_pilots(power);
  const auto items = stream_items(p, power, 80, 55);
  std::vector<FrameWindow> windows;
  std::vector<InfoWord> truth;
  for (const auto& it : items) {
    windows.push_back(it.window);
    truth.push_back(it.truth);
  }
  const auto via_lmmse = conventional_receive(windows, Estimator::Lmmse, pilots, p);
  const auto via_kalman = conventional_receive(windows, Estimator::Kalman, pilots, p);
  REQUIRE(via_lmmse.size() == windows.size());
  REQUIRE(via_kalman.size() == windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    CHECK(via_lmmse[i] == truth[i]);
    CHECK(via_kalman[i] == truth[i]);
  }
}

TEST_CASE("receiver wrappers agree with conventional_receive") {
  const double power = 1.0;
  FadingParams p{0.95, 1.0, snr_to_noise_var(power, 10.0)};
  const CVector pilots = unit_pilots(power);
  const auto items = stream_items(p, power, 200, 616);
  std::vector<FrameWindow> windows;
  for (const auto& it : items) windows.push_back(it.window);

  const auto batch_l = conventional_receive(windows, Estimator::Lmmse, pilots, p);
  const auto batch_k = conventional_receive(windows, Estimator::Kalman, pilots, p);
  MmseReceiver mmse(pilots, p);
  KalmanReceiver kalman(pilots, p);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    CHECK(mmse.decode(windows[i]) == batch_l[i]);
    CHECK(kalman.decode(windows[i]) == batch_k[i]);
  }
}

}  // TEST_SUITE("rx_conventional")
