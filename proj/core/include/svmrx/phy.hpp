#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "svmrx/numerics.hpp"

namespace svmrx {

inline constexpr std::size_t kInfoBits = 4;   // information bits per frame
inline constexpr std::size_t kCodedBits = 7;  // Hamming(7,4) codeword length
inline constexpr std::size_t kPilotLen = 1;   // pilot symbols per frame (L)
inline constexpr std::size_t kDataLen = kCodedBits;              // data symbols per frame (T)
inline constexpr std::size_t kFrameLen = kPilotLen + kDataLen;   // symbols per frame
inline constexpr std::size_t kNumClasses = 16;                   // 2^kInfoBits
// Decision window spans the current frame plus the next frame's pilots.
inline constexpr std::size_t kWindowLen = 2 * kPilotLen + kDataLen;

// Four information bits.  bits()[0] is the most significant bit of index(),
// so index 0b1000 = 8 has bits {1,0,0,0}.
class InfoWord {
 public:
  InfoWord() = default;
  explicit InfoWord(unsigned index);
  static InfoWord from_bits(const std::array<int, kInfoBits>& bits);

  unsigned index() const { return idx_; }
  int bit(std::size_t j) const { return (idx_ >> (kInfoBits - 1 - j)) & 1u; }
  std::array<int, kInfoBits> bits() const;

  friend bool operator==(InfoWord a, InfoWord b) { return a.idx_ == b.idx_; }
  friend bool operator!=(InfoWord a, InfoWord b) { return a.idx_ != b.idx_; }

 private:
  unsigned idx_ = 0;
};

struct Codeword {
  std::array<int, kCodedBits> bits;
};

// Systematic Hamming(7,4): codeword = [data | parity] with parity bits
//   c4 = b0+b1+b3,  c5 = b0+b2+b3,  c6 = b1+b2+b3  (mod 2).
Codeword hamming_encode(InfoWord w);

// Syndrome decode with single-error correction, then strip the data bits.
InfoWord hamming_decode_hard(const std::array<int, kCodedBits>& received);

// BPSK at symbol power P: bit 0 -> +sqrt(P), bit 1 -> -sqrt(P).
std::array<Complex, kCodedBits> bpsk_modulate(const Codeword& c, double power);

// Hard per-symbol decision on the real part; Re >= 0 -> bit 0.
std::array<int, kCodedBits> bpsk_demodulate_hard(std::span<const Complex> symbols);

// One transmitted frame: known pilots followed by modulated code symbols.
struct SymbolFrame {
  CVector pilots;  // kPilotLen symbols, +sqrt(P)
  CVector data;    // kDataLen symbols
  double power;
};

SymbolFrame build_frame(InfoWord w, double power);

}  // namespace svmrx
