// Offline/online oracle-distinguishing protocol.
//
// Offline: generate a labeled dataset against the known cipher, train a
// classifier, and accept it if its validation accuracy clears chance level
// by the configured margin (retrying with fresh data up to a budget).
// Online: replay the chosen-plaintext queries against an unknown oracle,
// evaluate the trained model on the resulting records (no weight updates),
// and call CIPHER iff the accuracy exceeds 1/t by z binomial standard
// deviations under the null.
#pragma once

#include <cstdint>
#include <memory>

#include "diffdist/cipher.hpp"
#include "diffdist/diffgen.hpp"
#include "diffdist/mlp.hpp"

namespace diffdist {

enum class OracleKind { Cipher, Random };
enum class Verdict { Cipher, Random };

// Black-box query interface: Block64 in, Block64 out. A CIPHER session hides
// a random key derived from the session seed; a RANDOM session answers with a
// keyed pseudorandom function, so repeated identical queries stay consistent
// within the session while distinct queries look uniform.
class Oracle {
 public:
  static Oracle cipher(CipherKind cipher, int rounds, std::uint64_t session_seed);
  static Oracle random(std::uint64_t session_seed);

  Block64 query(Block64 plaintext) const;
  OracleKind kind() const { return kind_; }

 private:
  Oracle() = default;
  OracleKind kind_ = OracleKind::Random;
  CipherKind cipher_ = CipherKind::Present;
  int rounds_ = 0;
  CipherKey key_{};
  std::uint64_t session_ = 0;
};

struct DecisionPolicy {
  double z = 3.0;  // one-sided threshold in null standard deviations
};

double decision_threshold(std::size_t t, std::size_t n_records, const DecisionPolicy& policy = {});

// Pure threshold rule on the online accuracy; n_records >= 1.
Verdict decide(double alpha_prime, std::size_t t, std::size_t n_records,
               const DecisionPolicy& policy = {});

struct OfflineResult {
  Mlp<float> model;
  DiffClassSet classes;
  double alpha = 0.0;  // validation accuracy of the accepted attempt
  int attempts = 0;
  bool success = false;  // false = no distinguisher found within the budget
  TrainReport report;
};

struct OfflineOptions {
  std::uint64_t pair_count = 10000;
  TrainConfig train;
  int max_attempts = 3;
  DecisionPolicy policy;
  std::string arch_preset = "proposed";
};

OfflineResult offline_phase(CipherKind cipher, int rounds, const DiffClassSet& classes,
                            const OfflineOptions& options, std::uint64_t seed);

struct OnlineReport {
  double alpha_prime = 0.0;
  std::uint64_t query_pairs = 0;
  std::size_t records = 0;
  Verdict verdict = Verdict::Random;
  double threshold = 0.0;
  double z = 3.0;
};

OnlineReport online_phase(const Mlp<float>& model, const Oracle& oracle,
                          const DiffClassSet& classes, std::uint64_t query_pairs,
                          std::uint64_t seed, const DecisionPolicy& policy = {});

}  // namespace diffdist
