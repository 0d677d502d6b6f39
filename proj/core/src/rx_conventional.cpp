#include "svmrx/rx_conventional.hpp"

#include <cmath>

#include "svmrx/errors.hpp"

namespace svmrx {

namespace {

void check_pilots(const CVector& pilots) {
  if (pilots.size() != kPilotLen)
    throw DimensionMismatch("expected " + std::to_string(kPilotLen) + " pilot symbols");
}

void check_window(const FrameWindow& w) {
  if (w.r_cur.size() != kPilotLen || w.r_next.size() != kPilotLen ||
      w.z.size() != kDataLen)
    throw DimensionMismatch("frame window has wrong block sizes");
}

// Append a block in time-reversed order.
void append_reversed(CVector& dest, const CVector& block) {
  dest.insert(dest.end(), block.rbegin(), block.rend());
}

// Pilot symbol observed by reversed-window slot k (k < L for the next
// frame's block, otherwise the current frame's block).
Complex reversed_pilot(const CVector& pilots, std::size_t k) {
  return pilots[kPilotLen - 1 - (k % kPilotLen)];
}

}  // namespace

CVector assemble_window(const FrameWindow& w) {
  check_window(w);
  CVector y;
  y.reserve(kWindowLen);
  append_reversed(y, w.r_next);
  append_reversed(y, w.z);
  append_reversed(y, w.r_cur);
  return y;
}

HypothesisTables::HypothesisTables(const CVector& pilots, const FadingParams& p,
                                   double power) {
  check_pilots(pilots);
  p.validate();
  if (!(power > 0.0)) throw InvalidConfig("hypothesis tables: power must be positive");

  const HermitianMatrix sigma_h = fading_covariance(kWindowLen, p);
  factors_.reserve(kNumClasses);
  log_dets_.reserve(kNumClasses);
  symbols_.reserve(kNumClasses);

  for (unsigned cls = 0; cls < kNumClasses; ++cls) {
    const auto data = bpsk_modulate(hamming_encode(InfoWord(cls)), power);
    CVector x;
    x.reserve(kWindowLen);
    append_reversed(x, pilots);
    x.insert(x.end(), data.rbegin(), data.rend());
    append_reversed(x, pilots);

    const HermitianMatrix sigma =
        HermitianMatrix::build(kWindowLen, [&](std::size_t i, std::size_t j) {
          Complex v = x[i] * std::conj(x[j]) * sigma_h.at(i, j);
          if (i == j) v += p.sigma_w2;
          return v;
        });
    CholeskyFactor f = cholesky(sigma);
    log_dets_.push_back(f.log_det());
    factors_.push_back(std::move(f));
    symbols_.push_back(std::move(x));
  }
}

InfoWord ml_decode(const FrameWindow& w, const HypothesisTables& tables) {
  const CVector y = assemble_window(w);
  unsigned best = 0;
  double best_metric = tables.factor(0).quadratic_form(y);
  for (unsigned cls = 1; cls < kNumClasses; ++cls) {
    const double m = tables.factor(cls).quadratic_form(y);
    if (m < best_metric) {
      best_metric = m;
      best = cls;
    }
  }
  return InfoWord(best);
}

CVector ChannelEstimate::data_slots() const {
  return CVector(h_hat.begin() + kPilotLen, h_hat.begin() + kPilotLen + kDataLen);
}

// Transmission-order pilot slot positions within the window.
static std::size_t pilot_slot(std::size_t k) {
  return k < kPilotLen ? k : kDataLen + k;  // k in [0, 2L)
}

ComplexMatrix build_lmmse_gain(const CVector& pilots, const FadingParams& p) {
  check_pilots(pilots);
  p.validate();
  const std::size_t np = 2 * kPilotLen;
  const HermitianMatrix sigma_h = fading_covariance(kWindowLen, p);
  auto pilot_at = [&](std::size_t k) { return pilots[k % kPilotLen]; };

  // Pilot-observation covariance and its cross-covariance with the window.
  const HermitianMatrix sigma_rr =
      HermitianMatrix::build(np, [&](std::size_t k, std::size_t l) {
        Complex v = pilot_at(k) * std::conj(pilot_at(l)) *
                    sigma_h.at(pilot_slot(k), pilot_slot(l));
        if (k == l) v += p.sigma_w2;
        return v;
      });
  ComplexMatrix sigma_hr(kWindowLen, np);
  for (std::size_t m = 0; m < kWindowLen; ++m)
    for (std::size_t k = 0; k < np; ++k)
      sigma_hr(m, k) = sigma_h.at(m, pilot_slot(k)) * std::conj(pilot_at(k));

  // W = sigma_hr * sigma_rr^{-1}, one Hermitian solve per window slot.
  const CholeskyFactor f = cholesky(sigma_rr);
  ComplexMatrix w(kWindowLen, np);
  for (std::size_t m = 0; m < kWindowLen; ++m) {
    CVector rhs(np);
    for (std::size_t k = 0; k < np; ++k) rhs[k] = std::conj(sigma_hr(m, k));
    const CVector x = f.solve(rhs);
    for (std::size_t k = 0; k < np; ++k) w(m, k) = std::conj(x[k]);
  }
  return w;
}

ChannelEstimate lmmse_estimate(const FrameWindow& w, const CVector& pilots,
                               const FadingParams& p) {
  check_window(w);
  const ComplexMatrix gain = build_lmmse_gain(pilots, p);
  CVector r_stack;
  r_stack.reserve(2 * kPilotLen);
  r_stack.insert(r_stack.end(), w.r_cur.begin(), w.r_cur.end());
  r_stack.insert(r_stack.end(), w.r_next.begin(), w.r_next.end());
  return ChannelEstimate{gain * r_stack, ChannelEstimate::Source::Lmmse};
}

namespace {

// State transition in the reversed-window convention: every new-window slot
// is driven from the previous window's newest pilot coefficient (column 0
// block) plus accumulated innovations; the trailing L slots are carried over
// unchanged.
ComplexMatrix kalman_f(const FadingParams& p) {
  ComplexMatrix f(kWindowLen, kWindowLen);
  const std::size_t steps = kFrameLen;  // window slides by one frame
  for (std::size_t k = 0; k < kPilotLen + kDataLen; ++k)
    f(k, 0) = std::pow(p.alpha, static_cast<double>(steps - k));
  for (std::size_t k = 0; k < kPilotLen; ++k) f(kPilotLen + kDataLen + k, k) = 1.0;
  return f;
}

// G Q G^H with G the upper-triangular powers-of-alpha accumulation matrix
// and Q = (1 - alpha^2) sigma_h2 I.
ComplexMatrix kalman_gqg(const FadingParams& p) {
  const std::size_t m = kFrameLen;
  ComplexMatrix g(kWindowLen, m);
  for (std::size_t k = 0; k < kPilotLen + kDataLen; ++k)
    for (std::size_t n = k; n < m; ++n)
      g(k, n) = std::pow(p.alpha, static_cast<double>(n - k));
  ComplexMatrix gqg = g * g.adjoint();
  gqg *= (1.0 - p.alpha * p.alpha) * p.sigma_h2;
  return gqg;
}

// Observation matrix: the two pilot blocks of the reversed window.
ComplexMatrix kalman_h(const CVector& pilots) {
  ComplexMatrix h(2 * kPilotLen, kWindowLen);
  for (std::size_t k = 0; k < kPilotLen; ++k) {
    h(k, k) = reversed_pilot(pilots, k);
    h(kPilotLen + k, kPilotLen + kDataLen + k) = reversed_pilot(pilots, k);
  }
  return h;
}

}  // namespace

KalmanState make_kalman_state(const FadingParams& p) {
  p.validate();
  return KalmanState{CVector(kWindowLen), fading_covariance(kWindowLen, p), 0};
}

void kalman_predict(KalmanState& s, const FadingParams& p) {
  const ComplexMatrix f = kalman_f(p);
  s.mean = f * s.mean;
  ComplexMatrix cov = f * s.cov.matrix() * f.adjoint();
  cov += kalman_gqg(p);
  s.cov = HermitianMatrix::from_matrix(cov, 1e-6);
}

ChannelEstimate kalman_update(KalmanState& s, const FrameWindow& w,
                              const CVector& pilots, const FadingParams& p) {
  check_window(w);
  check_pilots(pilots);
  const ComplexMatrix h = kalman_h(pilots);
  const std::size_t np = 2 * kPilotLen;

  // Innovation against the reversed pilot observations [r_next; r_cur].
  CVector obs;
  obs.reserve(np);
  append_reversed(obs, w.r_next);
  append_reversed(obs, w.r_cur);
  const CVector predicted = h * s.mean;
  CVector innov(np);
  for (std::size_t k = 0; k < np; ++k) innov[k] = obs[k] - predicted[k];

  const ComplexMatrix hp = h * s.cov.matrix();  // H P (np x D)
  const HermitianMatrix innov_cov =
      HermitianMatrix::build(np, [&](std::size_t k, std::size_t l) {
        Complex v = 0.0;
        for (std::size_t d = 0; d < kWindowLen; ++d)
          v += hp(k, d) * std::conj(h(l, d));
        if (k == l) v += p.sigma_w2;
        return v;
      });
  const CholeskyFactor sf = cholesky(innov_cov);

  // K = P H^H S^{-1} = (S^{-1} H P)^H.
  ComplexMatrix gain(kWindowLen, np);
  for (std::size_t d = 0; d < kWindowLen; ++d) {
    CVector col(np);
    for (std::size_t k = 0; k < np; ++k) col[k] = hp(k, d);
    const CVector u = sf.solve(col);
    for (std::size_t k = 0; k < np; ++k) gain(d, k) = std::conj(u[k]);
  }

  const CVector correction = gain * innov;
  for (std::size_t d = 0; d < kWindowLen; ++d) s.mean[d] += correction[d];

  // Joseph-form covariance update keeps the result symmetric and PSD.
  ComplexMatrix ikh = ComplexMatrix::identity(kWindowLen);
  ikh -= gain * h;
  ComplexMatrix cov = ikh * s.cov.matrix() * ikh.adjoint();
  ComplexMatrix krk = gain * gain.adjoint();
  krk *= p.sigma_w2;
  cov += krk;
  s.cov = HermitianMatrix::from_matrix(cov, 1e-6);
  s.frame_index += 1;

  // Posterior mean, flipped back to transmission order.
  CVector h_hat(kWindowLen);
  for (std::size_t d = 0; d < kWindowLen; ++d) h_hat[d] = s.mean[kWindowLen - 1 - d];
  return ChannelEstimate{std::move(h_hat), ChannelEstimate::Source::Kalman};
}

CVector equalize(const CVector& z, const CVector& h_hat_data) {
  if (z.size() != h_hat_data.size())
    throw DimensionMismatch("equalize: estimate/data length mismatch");
  constexpr double kDeadZone = 1e-30;
  CVector out(z.size());
  for (std::size_t t = 0; t < z.size(); ++t) {
    const double mag2 = std::norm(h_hat_data[t]);
    out[t] = mag2 < kDeadZone ? Complex{} : std::conj(h_hat_data[t]) * z[t] / mag2;
  }
  return out;
}

namespace {

InfoWord decide_from_estimate(const FrameWindow& w, const ChannelEstimate& est) {
  const CVector eq = equalize(w.z, est.data_slots());
  return hamming_decode_hard(bpsk_demodulate_hard(eq));
}

}  // namespace

std::vector<InfoWord> conventional_receive(const std::vector<FrameWindow>& frames,
                                           Estimator est, const CVector& pilots,
                                           const FadingParams& p) {
  std::vector<InfoWord> out;
  out.reserve(frames.size());
  if (est == Estimator::Lmmse) {
    MmseReceiver rx(pilots, p);
    for (const auto& w : frames) out.push_back(rx.decode(w));
  } else {
    KalmanReceiver rx(pilots, p);
    for (const auto& w : frames) out.push_back(rx.decode(w));
  }
  return out;
}

MmseReceiver::MmseReceiver(const CVector& pilots, const FadingParams& p)
    : gain_(build_lmmse_gain(pilots, p)) {}

ChannelEstimate MmseReceiver::estimate(const FrameWindow& w) const {
  check_window(w);
  CVector r_stack;
  r_stack.reserve(2 * kPilotLen);
  r_stack.insert(r_stack.end(), w.r_cur.begin(), w.r_cur.end());
  r_stack.insert(r_stack.end(), w.r_next.begin(), w.r_next.end());
  return ChannelEstimate{gain_ * r_stack, ChannelEstimate::Source::Lmmse};
}

InfoWord MmseReceiver::decode(const FrameWindow& w) const {
  return decide_from_estimate(w, estimate(w));
}

KalmanReceiver::KalmanReceiver(const CVector& pilots, const FadingParams& p)
    : pilots_(pilots), params_(p), state_(make_kalman_state(p)) {
  check_pilots(pilots);
}

InfoWord KalmanReceiver::decode(const FrameWindow& w) {
  if (state_.frame_index > 0) kalman_predict(state_, params_);
  const ChannelEstimate est = kalman_update(state_, w, pilots_, params_);
  return decide_from_estimate(w, est);
}

}  // namespace svmrx
