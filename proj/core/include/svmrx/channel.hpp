#pragma once

#include <cstdint>

#include "svmrx/numerics.hpp"
#include "svmrx/phy.hpp"
#include "svmrx/rng.hpp"

namespace svmrx {

// First-order Gauss-Markov flat-fading channel:
//   h(t) = alpha * h(t-1) + beta(t),  beta ~ CN(0, (1 - alpha^2) * sigma_h2)
//   y(t) = h(t) * x(t) + w(t),        w    ~ CN(0, sigma_w2)
// The innovation variance keeps the fading power stationary at sigma_h2.
struct FadingParams {
  double alpha = 0.99;
  double sigma_h2 = 1.0;
  double sigma_w2 = 0.0;

  void validate() const;  // throws InvalidConfig
};

// sigma_w2 for a given symbol power and SNR in dB (SNR = P / sigma_w2).
double snr_to_noise_var(double power, double snr_db);

// Fading process state.  `h` is the gain that multiplies the next
// transmitted symbol; `rng` also supplies the additive noise, so the draw
// order (per symbol: noise first, then the fading innovation) is part of the
// determinism contract.
struct FadingState {
  Complex h;
  Rng rng;
};

// Stationary start: h(0) ~ CN(0, sigma_h2).
FadingState make_fading_state(const FadingParams& p, std::uint64_t seed);

// Advance one symbol period and return the new gain.  alpha = 1 is the
// block-fading corner: the innovation variance is exactly zero and h never
// moves.
Complex step_fading(FadingState& s, const FadingParams& p);

// One observed frame, split at the receiver into pilot and data slots.
// h_true keeps the per-symbol gains (transmission order) for diagnostics.
struct ReceivedFrame {
  CVector r;       // pilot-slot observations, kPilotLen
  CVector z;       // data-slot observations, kDataLen
  InfoWord truth;
  CVector h_true;  // kFrameLen
};

// Pass one frame through the channel, consuming kFrameLen fading steps so
// that consecutive frames see one continuous fading process.
ReceivedFrame transmit(const SymbolFrame& f, FadingState& s, const FadingParams& p);

// Stationary fading covariance over `span` consecutive symbols:
// [m][n] = sigma_h2 * alpha^|m-n|.
HermitianMatrix fading_covariance(std::size_t span, const FadingParams& p);

// Everything a receiver sees when deciding frame i: the frame's pilot and
// data observations plus the next frame's pilots.  Blocks are in
// transmission order; receivers do any reindexing internally.
struct FrameWindow {
  CVector r_cur;   // kPilotLen
  CVector z;       // kDataLen
  CVector r_next;  // kPilotLen
};

}  // namespace svmrx
