// Uniform handle over the two supported ciphers for the data-generation and
// oracle layers, which draw a fresh key per plaintext pair.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "diffdist/present.hpp"
#include "diffdist/simeck.hpp"

namespace diffdist {

enum class CipherKind { Present, Simeck };

inline int max_rounds(CipherKind c) {
  return c == CipherKind::Present ? present::kMaxRounds : simeck::kMaxRounds;
}

inline std::string_view cipher_name(CipherKind c) {
  return c == CipherKind::Present ? "present" : "simeck";
}

inline CipherKind cipher_from_name(std::string_view name) {
  if (name == "present") return CipherKind::Present;
  if (name == "simeck") return CipherKind::Simeck;
  throw std::invalid_argument("unknown cipher: " + std::string(name));
}

struct CipherKey {
  CipherKind kind = CipherKind::Present;
  present::Key80 present_key{};
  simeck::Key128 simeck_key{};

  static CipherKey random(CipherKind kind, SplitMix64& rng) {
    CipherKey k;
    k.kind = kind;
    if (kind == CipherKind::Present)
      k.present_key = present::random_key(rng);
    else
      k.simeck_key = simeck::random_key(rng);
    return k;
  }
};

inline Block64 encrypt(CipherKind kind, Block64 plaintext, const CipherKey& key, int rounds) {
  return kind == CipherKind::Present ? present::encrypt(plaintext, key.present_key, rounds)
                                     : simeck::encrypt(plaintext, key.simeck_key, rounds);
}

}  // namespace diffdist
