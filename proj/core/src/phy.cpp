#include "svmrx/phy.hpp"

#include <cmath>
#include <stdexcept>

namespace svmrx {

namespace {

// Parity taps: parity bit p takes the data bits whose entry is 1.
// Rows of the P block of the systematic generator [I4 | P^T]^T transposed,
// i.e. c4 = b0+b1+b3, c5 = b0+b2+b3, c6 = b1+b2+b3.
constexpr int kParityTaps[3][4] = {
    {1, 1, 0, 1},
    {1, 0, 1, 1},
    {0, 1, 1, 1},
};

}  // namespace

InfoWord::InfoWord(unsigned index) : idx_(index) {
  if (index >= kNumClasses) throw std::out_of_range("InfoWord index must be < 16");
}

InfoWord InfoWord::from_bits(const std::array<int, kInfoBits>& bits) {
  unsigned idx = 0;
  for (std::size_t j = 0; j < kInfoBits; ++j) idx = (idx << 1) | (bits[j] & 1);
  return InfoWord(idx);
}

std::array<int, kInfoBits> InfoWord::bits() const {
  std::array<int, kInfoBits> b;
  for (std::size_t j = 0; j < kInfoBits; ++j) b[j] = bit(j);
  return b;
}

Codeword hamming_encode(InfoWord w) {
  const auto b = w.bits();
  Codeword c;
  for (std::size_t j = 0; j < kInfoBits; ++j) c.bits[j] = b[j];
  for (std::size_t p = 0; p < kCodedBits - kInfoBits; ++p) {
    int acc = 0;
    for (std::size_t j = 0; j < kInfoBits; ++j) acc ^= kParityTaps[p][j] & b[j];
    c.bits[kInfoBits + p] = acc;
  }
  return c;
}

InfoWord hamming_decode_hard(const std::array<int, kCodedBits>& received) {
  // Syndrome s = H r with H = [P | I3]; each column of H is distinct and
  // nonzero, so a nonzero syndrome pinpoints the single bit to flip.
  int syndrome[3];
  for (std::size_t p = 0; p < 3; ++p) {
    int acc = received[kInfoBits + p] & 1;
    for (std::size_t j = 0; j < kInfoBits; ++j) acc ^= kParityTaps[p][j] & received[j];
    syndrome[p] = acc;
  }

  std::array<int, kCodedBits> fixed = received;
  if (syndrome[0] | syndrome[1] | syndrome[2]) {
    for (std::size_t col = 0; col < kCodedBits; ++col) {
      const int h0 = col < kInfoBits ? kParityTaps[0][col] : (col == kInfoBits + 0);
      const int h1 = col < kInfoBits ? kParityTaps[1][col] : (col == kInfoBits + 1);
      const int h2 = col < kInfoBits ? kParityTaps[2][col] : (col == kInfoBits + 2);
      if (h0 == syndrome[0] && h1 == syndrome[1] && h2 == syndrome[2]) {
        fixed[col] ^= 1;
        break;
      }
    }
  }

  std::array<int, kInfoBits> data;
  for (std::size_t j = 0; j < kInfoBits; ++j) data[j] = fixed[j] & 1;
  return InfoWord::from_bits(data);
}

std::array<Complex, kCodedBits> bpsk_modulate(const Codeword& c, double power) {
  const double amp = std::sqrt(power);
  std::array<Complex, kCodedBits> s;
  for (std::size_t t = 0; t < kCodedBits; ++t)
    s[t] = Complex(c.bits[t] ? -amp : amp, 0.0);
  return s;
}

std::array<int, kCodedBits> bpsk_demodulate_hard(std::span<const Complex> symbols) {
  if (symbols.size() != kCodedBits)
    throw std::out_of_range("bpsk_demodulate_hard: expected 7 symbols");
  std::array<int, kCodedBits> bits;
  for (std::size_t t = 0; t < kCodedBits; ++t) bits[t] = symbols[t].real() >= 0.0 ? 0 : 1;
  return bits;
}

SymbolFrame build_frame(InfoWord w, double power) {
  SymbolFrame f;
  f.power = power;
  f.pilots.assign(kPilotLen, Complex(std::sqrt(power), 0.0));
  const auto symbols = bpsk_modulate(hamming_encode(w), power);
  f.data.assign(symbols.begin(), symbols.end());
  return f;
}

}  // namespace svmrx
