// Round-reduced PRESENT with the 80-bit key schedule.
//
// State is a Block64 with bit 63 most significant. The permutation sends
// input bit i to output bit P(i) = 16*i mod 63 for i < 63 and P(63) = 63.
// Subkey K_i is the leftmost 64 bits of the 80-bit key register; after each
// extraction the register is rotated left by 61, the top nibble passes
// through the S-box and the round counter is XORed into bits 19..15.
#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "diffdist/bits.hpp"
#include "diffdist/rng.hpp"

namespace diffdist::present {

inline constexpr int kMaxRounds = 31;

// 80-bit key register: bits 79..64 live in the low 16 bits of `hi`,
// bits 63..0 in `lo`.
struct Key80 {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  friend bool operator==(const Key80&, const Key80&) = default;
};

// Parses exactly 20 hex digits (k_79 first). Throws std::invalid_argument.
Key80 key_from_hex(std::string_view s);
std::string key_to_hex(const Key80& k);
Key80 random_key(SplitMix64& rng);

std::uint8_t sbox(std::uint8_t x);
std::uint8_t inv_sbox(std::uint8_t x);

Block64 sbox_layer(Block64 state);
Block64 inv_sbox_layer(Block64 state);
Block64 p_layer(Block64 state);
Block64 inv_p_layer(Block64 state);

inline Block64 add_round_key(Block64 state, Block64 subkey) { return state ^ subkey; }

// rounds+1 subkeys K_1..K_{rounds+1}. Throws std::out_of_range unless
// 1 <= rounds <= 31.
std::vector<Block64> key_schedule(const Key80& key, int rounds);

Block64 encrypt(Block64 plaintext, const Key80& key, int rounds);
Block64 decrypt(Block64 ciphertext, const Key80& key, int rounds);

}  // namespace diffdist::present
