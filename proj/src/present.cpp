#include "diffdist/present.hpp"

#include <array>
#include <stdexcept>

namespace diffdist::present {

namespace {

constexpr std::array<std::uint8_t, 16> kSbox = {0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD,
                                                0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2};

constexpr std::array<std::uint8_t, 16> make_inv_sbox() {
  std::array<std::uint8_t, 16> inv{};
  for (int i = 0; i < 16; ++i) inv[kSbox[i]] = static_cast<std::uint8_t>(i);
  return inv;
}
constexpr std::array<std::uint8_t, 16> kInvSbox = make_inv_sbox();

constexpr int perm(int i) { return i == 63 ? 63 : (16 * i) % 63; }

constexpr std::array<std::uint8_t, 64> make_perm() {
  std::array<std::uint8_t, 64> p{};
  for (int i = 0; i < 64; ++i) p[i] = static_cast<std::uint8_t>(perm(i));
  return p;
}
constexpr std::array<std::uint8_t, 64> make_inv_perm() {
  std::array<std::uint8_t, 64> p{};
  for (int i = 0; i < 64; ++i) p[perm(i)] = static_cast<std::uint8_t>(i);
  return p;
}
constexpr std::array<std::uint8_t, 64> kPerm = make_perm();
constexpr std::array<std::uint8_t, 64> kInvPerm = make_inv_perm();

void check_rounds(int rounds) {
  if (rounds < 1 || rounds > kMaxRounds)
    throw std::out_of_range("present: rounds must be in [1, 31]");
}

std::uint64_t subkey64(const Key80& k) { return (k.hi << 48) | (k.lo >> 16); }

// One key-register update for round counter `round` (1-based).
Key80 update_register(const Key80& k, int round) {
  // Rotate the 80-bit register left by 61: new bit j = old bit (j + 19) mod 80.
  Key80 r;
  r.hi = (k.lo >> 3) & 0xFFFF;
  r.lo = ((k.lo & 0x7ULL) << 61) | (k.hi << 45) | ((k.lo >> 19) & ((1ULL << 45) - 1));
  // Top nibble k_79..k_76 through the S-box.
  r.hi = (static_cast<std::uint64_t>(kSbox[(r.hi >> 12) & 0xF]) << 12) | (r.hi & 0x0FFF);
  // Round counter into bits k_19..k_15.
  r.lo ^= static_cast<std::uint64_t>(round) << 15;
  return r;
}

}  // namespace

Key80 key_from_hex(std::string_view s) {
  if (s.size() != 20) throw std::invalid_argument("present key must be 20 hex digits");
  Key80 k;
  k.hi = parse_hex64(s.substr(0, 4));
  k.lo = parse_hex64(s.substr(4));
  return k;
}

std::string key_to_hex(const Key80& k) { return to_hex(k.hi, 4) + to_hex(k.lo, 16); }

Key80 random_key(SplitMix64& rng) {
  Key80 k;
  k.hi = rng.next() & 0xFFFF;
  k.lo = rng.next();
  return k;
}

std::uint8_t sbox(std::uint8_t x) { return kSbox[x & 0xF]; }
std::uint8_t inv_sbox(std::uint8_t x) { return kInvSbox[x & 0xF]; }

Block64 sbox_layer(Block64 state) {
  Block64 out = 0;
  for (int i = 0; i < 16; ++i)
    out |= static_cast<Block64>(kSbox[(state >> (4 * i)) & 0xF]) << (4 * i);
  return out;
}

Block64 inv_sbox_layer(Block64 state) {
  Block64 out = 0;
  for (int i = 0; i < 16; ++i)
    out |= static_cast<Block64>(kInvSbox[(state >> (4 * i)) & 0xF]) << (4 * i);
  return out;
}

Block64 p_layer(Block64 state) {
  Block64 out = 0;
  for (int i = 0; i < 64; ++i) out |= ((state >> i) & 1ULL) << kPerm[i];
  return out;
}

Block64 inv_p_layer(Block64 state) {
  Block64 out = 0;
  for (int i = 0; i < 64; ++i) out |= ((state >> i) & 1ULL) << kInvPerm[i];
  return out;
}

std::vector<Block64> key_schedule(const Key80& key, int rounds) {
  check_rounds(rounds);
  std::vector<Block64> keys;
  keys.reserve(static_cast<std::size_t>(rounds) + 1);
  Key80 reg = key;
  for (int i = 1; i <= rounds; ++i) {
    keys.push_back(subkey64(reg));
    reg = update_register(reg, i);
  }
  keys.push_back(subkey64(reg));
  return keys;
}

Block64 encrypt(Block64 plaintext, const Key80& key, int rounds) {
  const auto keys = key_schedule(key, rounds);
  Block64 s = plaintext;
  for (int i = 0; i < rounds; ++i) {
    s = add_round_key(s, keys[static_cast<std::size_t>(i)]);
    s = sbox_layer(s);
    s = p_layer(s);
  }
  return add_round_key(s, keys[static_cast<std::size_t>(rounds)]);
}

Block64 decrypt(Block64 ciphertext, const Key80& key, int rounds) {
  const auto keys = key_schedule(key, rounds);
  Block64 s = add_round_key(ciphertext, keys[static_cast<std::size_t>(rounds)]);
  for (int i = rounds - 1; i >= 0; --i) {
    s = inv_p_layer(s);
    s = inv_sbox_layer(s);
    s = add_round_key(s, keys[static_cast<std::size_t>(i)]);
  }
  return s;
}

}  // namespace diffdist::present
