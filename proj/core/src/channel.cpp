#include "svmrx/channel.hpp"

#include <cmath>

#include "svmrx/errors.hpp"

namespace svmrx {

void FadingParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidConfig("fading: alpha must lie in [0, 1]");
  if (!(sigma_h2 > 0.0)) throw InvalidConfig("fading: sigma_h2 must be positive");
  if (!(sigma_w2 >= 0.0)) throw InvalidConfig("fading: sigma_w2 must be nonnegative");
}

double snr_to_noise_var(double power, double snr_db) {
  if (!(power > 0.0)) throw InvalidConfig("snr_to_noise_var: power must be positive");
  return power * std::pow(10.0, -snr_db / 10.0);
}

FadingState make_fading_state(const FadingParams& p, std::uint64_t seed) {
  p.validate();
  FadingState s{Complex{}, Rng(seed)};
  s.h = s.rng.complex_gaussian(p.sigma_h2);
  return s;
}

Complex step_fading(FadingState& s, const FadingParams& p) {
  const double innov_var = (1.0 - p.alpha * p.alpha) * p.sigma_h2;
  s.h = p.alpha * s.h + s.rng.complex_gaussian(innov_var);
  return s.h;
}

ReceivedFrame transmit(const SymbolFrame& f, FadingState& s, const FadingParams& p) {
  ReceivedFrame out;
  out.h_true.reserve(kFrameLen);
  out.r.reserve(f.pilots.size());
  out.z.reserve(f.data.size());

  auto push = [&](Complex x, CVector& dest) {
    out.h_true.push_back(s.h);
    // Noise before the fading innovation: this order is part of the
    // reproducibility contract.
    const Complex w = s.rng.complex_gaussian(p.sigma_w2);
    dest.push_back(s.h * x + w);
    step_fading(s, p);
  };

  for (Complex x : f.pilots) push(x, out.r);
  for (Complex x : f.data) push(x, out.z);
  return out;
}

HermitianMatrix fading_covariance(std::size_t span, const FadingParams& p) {
  return HermitianMatrix::build(span, [&](std::size_t i, std::size_t j) {
    return Complex(p.sigma_h2 * std::pow(p.alpha, static_cast<double>(i - j)), 0.0);
  });
}

}  // namespace svmrx
