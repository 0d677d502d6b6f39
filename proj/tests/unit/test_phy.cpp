#include <array>
#include <cmath>
#include <cstddef>

#include <doctest.h>

#include "svmrx/phy.hpp"

using namespace svmrx;

namespace {

// Oracle encoder: generator-matrix multiply over GF(2).  The production
// encoder writes the parity equations out directly; this route goes through
// G = [I | P] so the two implementations share no code.
constexpr int kGen[kInfoBits][kCodedBits] = {
    {1, 0, 0, 0, 1, 1, 0},
    {0, 1, 0, 0, 1, 0, 1},
    {0, 0, 1, 0, 0, 1, 1},
    {0, 0, 0, 1, 1, 1, 1},
};

// Parity-check matrix H = [P^T | I]; every codeword has zero syndrome.
constexpr int kChk[3][kCodedBits] = {
    {1, 1, 0, 1, 1, 0, 0},
    {1, 0, 1, 1, 0, 1, 0},
    {0, 1, 1, 1, 0, 0, 1},
};

std::array<int, kCodedBits> encode_oracle(InfoWord w) {
  std::array<int, kCodedBits> c{};
  for (std::size_t j = 0; j < kCodedBits; ++j) {
    int acc = 0;
    for (std::size_t i = 0; i < kInfoBits; ++i) acc ^= w.bit(i) & kGen[i][j];
    c[j] = acc;
  }
  return c;
}

int hamming_weight(const std::array<int, kCodedBits>& c) {
  int n = 0;
  for (int b : c) n += b;
  return n;
}

}  // namespace

TEST_SUITE("phy") {

TEST_CASE("InfoWord bit order: bits()[0] is the most significant bit") {
  const InfoWord w(0b1000);
  CHECK(w.index() == 8);
  CHECK(w.bit(0) == 1);
  CHECK(w.bit(1) == 0);
  CHECK(w.bit(2) == 0);
  CHECK(w.bit(3) == 0);
  CHECK(w.bits() == std::array<int, 4>{1, 0, 0, 0});

  const InfoWord v(0b0101);
  CHECK(v.bits() == std::array<int, 4>{0, 1, 0, 1});

  for (unsigned idx = 0; idx < kNumClasses; ++idx) {
    const InfoWord u(idx);
    CHECK(InfoWord::from_bits(u.bits()) == u);
  }
}

TEST_CASE("encoder matches the generator-matrix oracle for all 16 words") {
  for (unsigned idx = 0; idx < kNumClasses; ++idx) {
    const InfoWord w(idx);
    const Codeword c = hamming_encode(w);
    CHECK(c.bits == encode_oracle(w));
    // Systematic: data bits pass through in the first four slots.
    for (std::size_t j = 0; j < kInfoBits; ++j) CHECK(c.bits[j] == w.bit(j));
  }
}

TEST_CASE("every codeword has zero syndrome") {
  for (unsigned idx = 0; idx < kNumClasses; ++idx) {
    const Codeword c = hamming_encode(InfoWord(idx));
    for (const auto& row : kChk) {
      int s = 0;
      for (std::size_t j = 0; j < kCodedBits; ++j) s ^= row[j] & c.bits[j];
      CHECK(s == 0);
    }
  }
}

TEST_CASE("weight distribution is 1 + 7x^3 + 7x^4 + x^7") {
  std::array<int, kCodedBits + 1> counts{};
  for (unsigned idx = 0; idx < kNumClasses; ++idx)
    ++counts[hamming_weight(hamming_encode(InfoWord(idx)).bits)];
  CHECK(counts[0] == 1);
  CHECK(counts[3] == 7);
  CHECK(counts[4] == 7);
  CHECK(counts[7] == 1);
  CHECK(counts[1] + counts[2] + counts[5] + counts[6] == 0);
}

TEST_CASE("code is linear and closed under complement") {
  for (unsigned a = 0; a < kNumClasses; ++a) {
    const Codeword ca = hamming_encode(InfoWord(a));
    // Complement of a codeword is the codeword of the complemented word.
    const Codeword cc = hamming_encode(InfoWord(a ^ 0xFu));
    for (std::size_t j = 0; j < kCodedBits; ++j) CHECK(cc.bits[j] == 1 - ca.bits[j]);
    for (unsigned b = 0; b < kNumClasses; ++b) {
      const Codeword cb = hamming_encode(InfoWord(b));
      const Codeword cx = hamming_encode(InfoWord(a ^ b));
      for (std::size_t j = 0; j < kCodedBits; ++j)
        CHECK(cx.bits[j] == (ca.bits[j] ^ cb.bits[j]));
    }
  }
}

TEST_CASE("round trip and exhaustive single-error correction") {
  for (unsigned idx = 0; idx < kNumClasses; ++idx) {
    const InfoWord w(idx);
    const Codeword c = hamming_encode(w);
    CHECK(hamming_decode_hard(c.bits) == w);
    for (std::size_t e = 0; e < kCodedBits; ++e) {
      auto noisy = c.bits;
      noisy[e] ^= 1;
      CHECK(hamming_decode_hard(noisy) == w);
    }
  }
}

TEST_CASE("every double error decodes to a different word") {
  // Hamming(7,4) is perfect: each 2-error pattern lands at distance one from
  // exactly one other codeword, so the decoder must miss on all of them.
  for (unsigned idx = 0; idx < kNumClasses; ++idx) {
    const InfoWord w(idx);
    const Codeword c = hamming_encode(w);
    for (std::size_t e1 = 0; e1 < kCodedBits; ++e1) {
      for (std::size_t e2 = e1 + 1; e2 < kCodedBits; ++e2) {
        auto noisy = c.bits;
        noisy[e1] ^= 1;
        noisy[e2] ^= 1;
        CHECK(hamming_decode_hard(noisy) != w);
      }
    }
  }
}

TEST_CASE("BPSK maps bit 0 to +sqrt(P) and bit 1 to -sqrt(P)") {
  Codeword c{};
  c.bits = {0, 1, 0, 1, 1, 0, 0};
  const auto sym = bpsk_modulate(c, 4.0);
  for (std::size_t j = 0; j < kCodedBits; ++j) {
    CHECK(sym[j].imag() == 0.0);
    CHECK(sym[j].real() == (c.bits[j] == 0 ? 2.0 : -2.0));
  }
}

TEST_CASE("hard demodulation thresholds the real part at zero") {
  const Complex symbols[] = {{0.3, -5.0}, {-0.2, 7.0}, {0.0, 1.0}, {-1e-12, 0.0},
                             {2.0, 0.0},  {-3.0, 0.0}, {1e-12, 0.0}};
  const auto bits = bpsk_demodulate_hard(symbols);
  CHECK(bits == std::array<int, 7>{0, 1, 0, 1, 0, 1, 0});
}

TEST_CASE("modulate/demodulate round-trips every codeword") {
  for (unsigned idx = 0; idx < kNumClasses; ++idx) {
    const Codeword c = hamming_encode(InfoWord(idx));
    const auto sym = bpsk_modulate(c, 2.5);
    CHECK(bpsk_demodulate_hard(sym) == c.bits);
  }
}

TEST_CASE("build_frame lays out pilots then modulated code symbols") {
  const double power = 2.0;
  const double amp = std::sqrt(power);
  for (unsigned idx : {0u, 5u, 15u}) {
    const InfoWord w(idx);
    const SymbolFrame f = build_frame(w, power);
    CHECK(f.power == power);
    REQUIRE(f.pilots.size() == kPilotLen);
    REQUIRE(f.data.size() == kDataLen);
    for (const Complex& p : f.pilots) CHECK(p == Complex{amp});
    const auto expect = bpsk_modulate(hamming_encode(w), power);
    for (std::size_t j = 0; j < kDataLen; ++j) CHECK(f.data[j] == expect[j]);
  }
}

TEST_CASE("frame length constants are consistent") {
  CHECK(kFrameLen == kPilotLen + kDataLen);
  CHECK(kWindowLen == 2 * kPilotLen + kDataLen);
  CHECK(kNumClasses == (1u << kInfoBits));
  CHECK(kDataLen == kCodedBits);
}

}  // TEST_SUITE("phy")
