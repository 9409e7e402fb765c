#include "diffdist/distinguisher.hpp"

#include <cmath>
#include <stdexcept>

namespace diffdist {

Oracle Oracle::cipher(CipherKind cipher, int rounds, std::uint64_t session_seed) {
  if (rounds < 1 || rounds > max_rounds(cipher))
    throw std::out_of_range("oracle: rounds out of range for cipher");
  Oracle o;
  o.kind_ = OracleKind::Cipher;
  o.cipher_ = cipher;
  o.rounds_ = rounds;
  SplitMix64 rng(derive_seed(session_seed, 0x6F7261636CULL));
  o.key_ = CipherKey::random(cipher, rng);
  return o;
}

Oracle Oracle::random(std::uint64_t session_seed) {
  Oracle o;
  o.kind_ = OracleKind::Random;
  o.session_ = derive_seed(session_seed, 0x72616E64ULL);
  return o;
}

Block64 Oracle::query(Block64 plaintext) const {
  if (kind_ == OracleKind::Cipher) return encrypt(cipher_, plaintext, key_, rounds_);
  return mix64(session_ ^ mix64(plaintext + 0x9E3779B97F4A7C15ULL));
}

double decision_threshold(std::size_t t, std::size_t n_records, const DecisionPolicy& policy) {
  const double p0 = 1.0 / static_cast<double>(t);
  const double sigma = std::sqrt(p0 * (1.0 - p0) / static_cast<double>(n_records));
  return p0 + policy.z * sigma;
}

Verdict decide(double alpha_prime, std::size_t t, std::size_t n_records,
               const DecisionPolicy& policy) {
  if (n_records < 1) throw std::invalid_argument("decide: need at least one record");
  if (t < 2) throw std::invalid_argument("decide: t must be >= 2");
  return alpha_prime > decision_threshold(t, n_records, policy) ? Verdict::Cipher
                                                                : Verdict::Random;
}

OfflineResult offline_phase(CipherKind cipher, int rounds, const DiffClassSet& classes,
                            const OfflineOptions& options, std::uint64_t seed) {
  classes.validate();
  options.train.validate();
  if (options.max_attempts < 1)
    throw std::invalid_argument("offline_phase: max_attempts must be >= 1");

  OfflineResult result;
  result.classes = classes;
  const MlpArch arch = MlpArch::preset(options.arch_preset, static_cast<int>(classes.t()));

  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    result.attempts = attempt + 1;
    const std::uint64_t attempt_seed = derive_seed(seed, 0x6F66666CULL, static_cast<std::uint64_t>(attempt));

    const DiffDataset data =
        generate_dataset(cipher, rounds, classes, options.pair_count, derive_seed(attempt_seed, 1));
    const SplitIndices split =
        split_train_val(data, options.train.val_fraction, derive_seed(attempt_seed, 2));
    const FeatureMatrix train_set = featurize(data, split.train);
    const FeatureMatrix val_set = featurize(data, split.val);

    TrainConfig cfg = options.train;
    cfg.seed = derive_seed(attempt_seed, 3);
    result.model = init_model<float>(arch, derive_seed(cfg.seed, 0x696E6974ULL));
    result.report = train_mlp(result.model, train_set, val_set, cfg);
    result.alpha = result.report.final_val_acc;

    // Accept when validation accuracy clears chance by the same margin the
    // online decision uses, judged at the validation sample size.
    if (!result.report.diverged &&
        result.alpha > decision_threshold(classes.t(), val_set.n, options.policy)) {
      result.success = true;
      return result;
    }
  }
  result.success = false;
  return result;
}

OnlineReport online_phase(const Mlp<float>& model, const Oracle& oracle,
                          const DiffClassSet& classes, std::uint64_t query_pairs,
                          std::uint64_t seed, const DecisionPolicy& policy) {
  classes.validate();
  if (query_pairs < 1) throw std::invalid_argument("online_phase: query_pairs must be >= 1");

  const std::size_t t = classes.t();
  FeatureMatrix records;
  records.n = query_pairs * t;
  records.dim = 64;
  records.t = t;
  records.x.resize(records.n * records.dim);
  records.y.resize(records.n);

  for (std::uint64_t q = 0; q < query_pairs; ++q) {
    SplitMix64 rng(derive_seed(seed, 0x6F6E6C696EULL, q));
    const Block64 p = rng.next();
    const Block64 c = oracle.query(p);
    for (std::size_t i = 0; i < t; ++i) {
      const Block64 ci = oracle.query(p ^ classes.deltas[i]);
      const DiffSample sample{c ^ ci, static_cast<std::uint16_t>(i)};
      const std::size_t row = q * t + i;
      encode_features(sample, records.x.data() + row * records.dim);
      records.y[row] = sample.label;
    }
  }

  OnlineReport report;
  report.query_pairs = query_pairs;
  report.records = records.n;
  report.z = policy.z;
  report.alpha_prime = evaluate_accuracy(model, records);
  report.threshold = decision_threshold(t, records.n, policy);
  report.verdict = decide(report.alpha_prime, t, records.n, policy);
  return report;
}

}  // namespace diffdist
