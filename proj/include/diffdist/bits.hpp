// 64-bit block helpers shared by the cipher and analysis code.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace diffdist {

// One cipher block / plaintext / ciphertext / difference. Bit 63 is the most
// significant bit of the state in the permutation-layer indexing used here.
using Block64 = std::uint64_t;

constexpr std::uint32_t rotl32(std::uint32_t x, int r) {
  return (x << r) | (x >> (32 - r));
}

constexpr std::uint64_t rotl64(std::uint64_t x, int r) {
  return (x << r) | (x >> (64 - r));
}

inline int popcount64(std::uint64_t x) { return __builtin_popcountll(x); }

// Number of nonzero nibbles of a block (0..16).
inline int active_nibbles(Block64 x) {
  int n = 0;
  for (int i = 0; i < 16; ++i) n += ((x >> (4 * i)) & 0xF) != 0;
  return n;
}

std::string to_hex(std::uint64_t v, int digits = 16);

// Parses up to 16 hex digits (optional 0x prefix). Throws std::invalid_argument.
std::uint64_t parse_hex64(std::string_view s);

}  // namespace diffdist
