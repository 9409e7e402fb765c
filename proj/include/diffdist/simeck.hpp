// Round-reduced Simeck64/128 (word size n = 32, full cipher 44 rounds).
//
// Feistel round: (l, r) -> (r ^ f(l) ^ k, l) with f(z) = (z & rotl(z,5)) ^ rotl(z,1).
// The key schedule keeps a four-word register (t2, t1, t0, k); the round key
// is the current k word and the register is updated by the round function
// itself with constant 2^32 - 4 XOR z_i in place of a key, where z is the
// m-sequence of the LFSR x^6 + x + 1 started from the all-ones state.
#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "diffdist/bits.hpp"
#include "diffdist/rng.hpp"

namespace diffdist::simeck {

inline constexpr int kMaxRounds = 44;

struct State {
  std::uint32_t left = 0;   // most significant half of the block
  std::uint32_t right = 0;  // least significant half

  friend bool operator==(const State&, const State&) = default;
};

inline State split(Block64 block) {
  return {static_cast<std::uint32_t>(block >> 32), static_cast<std::uint32_t>(block)};
}

inline Block64 join(State s) {
  return (static_cast<Block64>(s.left) << 32) | s.right;
}

// Master key words; word[3] is the most significant word of the 128-bit key
// (loaded into t2), word[0] the least significant (the first round key k_0).
struct Key128 {
  std::uint32_t word[4] = {0, 0, 0, 0};

  friend bool operator==(const Key128&, const Key128&) = default;
};

// Parses exactly 32 hex digits, most significant word first.
Key128 key_from_hex(std::string_view s);
std::string key_to_hex(const Key128& k);
Key128 random_key(SplitMix64& rng);

inline std::uint32_t f(std::uint32_t z) { return (z & rotl32(z, 5)) ^ rotl32(z, 1); }

inline State round(State s, std::uint32_t subkey) {
  return {s.right ^ f(s.left) ^ subkey, s.left};
}

inline State inv_round(State s, std::uint32_t subkey) {
  return {s.right, s.left ^ f(s.right) ^ subkey};
}

// i-th bit of the round-constant sequence (period 63).
int z_bit(int i);

// Round keys k_0..k_{rounds-1}. Throws std::out_of_range unless 1 <= rounds <= 44.
std::vector<std::uint32_t> key_schedule(const Key128& key, int rounds);

Block64 encrypt(Block64 plaintext, const Key128& key, int rounds);
Block64 decrypt(Block64 ciphertext, const Key128& key, int rounds);

}  // namespace diffdist::simeck
