#include "diffdist/simeck.hpp"

#include <array>
#include <stdexcept>

namespace diffdist::simeck {

namespace {

constexpr std::uint32_t kConstant = 0xFFFFFFFCu;  // 2^32 - 4

void check_rounds(int rounds) {
  if (rounds < 1 || rounds > kMaxRounds)
    throw std::out_of_range("simeck: rounds must be in [1, 44]");
}

}  // namespace

Key128 key_from_hex(std::string_view s) {
  if (s.size() != 32) throw std::invalid_argument("simeck key must be 32 hex digits");
  Key128 k;
  for (int w = 0; w < 4; ++w)
    k.word[3 - w] = static_cast<std::uint32_t>(parse_hex64(s.substr(8 * static_cast<std::size_t>(w), 8)));
  return k;
}

std::string key_to_hex(const Key128& k) {
  std::string s;
  for (int w = 3; w >= 0; --w) s += to_hex(k.word[w], 8);
  return s;
}

Key128 random_key(SplitMix64& rng) {
  Key128 k;
  const std::uint64_t a = rng.next();
  const std::uint64_t b = rng.next();
  k.word[0] = static_cast<std::uint32_t>(a);
  k.word[1] = static_cast<std::uint32_t>(a >> 32);
  k.word[2] = static_cast<std::uint32_t>(b);
  k.word[3] = static_cast<std::uint32_t>(b >> 32);
  return k;
}

int z_bit(int i) {
  // x^6 + x + 1 with all-ones start: s[j+6] = s[j+1] ^ s[j], period 63.
  static const auto seq = [] {
    std::array<std::uint8_t, 63> s{};
    for (int j = 0; j < 6; ++j) s[static_cast<std::size_t>(j)] = 1;
    for (int j = 0; j + 6 < 63; ++j)
      s[static_cast<std::size_t>(j + 6)] =
          static_cast<std::uint8_t>(s[static_cast<std::size_t>(j + 1)] ^ s[static_cast<std::size_t>(j)]);
    return s;
  }();
  return seq[static_cast<std::size_t>(i % 63)];
}

std::vector<std::uint32_t> key_schedule(const Key128& key, int rounds) {
  check_rounds(rounds);
  std::vector<std::uint32_t> keys(static_cast<std::size_t>(rounds));
  std::uint32_t k = key.word[0];
  std::uint32_t t0 = key.word[1];
  std::uint32_t t1 = key.word[2];
  std::uint32_t t2 = key.word[3];
  for (int i = 0; i < rounds; ++i) {
    keys[static_cast<std::size_t>(i)] = k;
    const std::uint32_t fresh = k ^ f(t0) ^ kConstant ^ static_cast<std::uint32_t>(z_bit(i));
    k = t0;
    t0 = t1;
    t1 = t2;
    t2 = fresh;
  }
  return keys;
}

Block64 encrypt(Block64 plaintext, const Key128& key, int rounds) {
  const auto keys = key_schedule(key, rounds);
  State s = split(plaintext);
  for (int i = 0; i < rounds; ++i) s = round(s, keys[static_cast<std::size_t>(i)]);
  return join(s);
}

Block64 decrypt(Block64 ciphertext, const Key128& key, int rounds) {
  const auto keys = key_schedule(key, rounds);
  State s = split(ciphertext);
  for (int i = rounds - 1; i >= 0; --i) s = inv_round(s, keys[static_cast<std::size_t>(i)]);
  return join(s);
}

}  // namespace diffdist::simeck
