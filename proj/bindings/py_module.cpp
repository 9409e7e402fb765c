// Python bindings for the main operations: the two ciphers, differential
// sets, dataset generation, the DDT baseline, training and the
// offline/online distinguisher protocol.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "diffdist/ddt.hpp"
#include "diffdist/distinguisher.hpp"
#include "diffdist/experiment.hpp"

namespace py = pybind11;
using namespace diffdist;

namespace {

DiffClassSet set_from_deltas(const std::vector<std::uint64_t>& deltas) {
  DiffClassSet s;
  s.deltas = deltas;
  s.validate();
  return s;
}

TrainConfig config_from_kwargs(double lr, int epochs, int batch, double val_fraction,
                               std::uint64_t seed, const std::string& loss) {
  TrainConfig cfg;
  cfg.learning_rate = lr;
  cfg.epochs = epochs;
  cfg.batch_size = batch;
  cfg.val_fraction = val_fraction;
  cfg.seed = seed;
  cfg.loss = loss == "softmax" ? LossKind::SoftmaxXent : LossKind::Bce;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "neural differential distinguisher workbench for PRESENT-80 and Simeck64/128";

  m.def(
      "present_encrypt",
      [](std::uint64_t pt, const std::string& key_hex, int rounds) {
        return present::encrypt(pt, present::key_from_hex(key_hex), rounds);
      },
      py::arg("plaintext"), py::arg("key_hex"), py::arg("rounds") = present::kMaxRounds);
  m.def(
      "present_decrypt",
      [](std::uint64_t ct, const std::string& key_hex, int rounds) {
        return present::decrypt(ct, present::key_from_hex(key_hex), rounds);
      },
      py::arg("ciphertext"), py::arg("key_hex"), py::arg("rounds") = present::kMaxRounds);
  m.def(
      "simeck_encrypt",
      [](std::uint64_t pt, const std::string& key_hex, int rounds) {
        return simeck::encrypt(pt, simeck::key_from_hex(key_hex), rounds);
      },
      py::arg("plaintext"), py::arg("key_hex"), py::arg("rounds") = simeck::kMaxRounds);
  m.def(
      "simeck_decrypt",
      [](std::uint64_t ct, const std::string& key_hex, int rounds) {
        return simeck::decrypt(ct, simeck::key_from_hex(key_hex), rounds);
      },
      py::arg("ciphertext"), py::arg("key_hex"), py::arg("rounds") = simeck::kMaxRounds);

  m.def("sbox_ddt", [] {
    const DdtTable t = present_sbox_ddt();
    std::vector<std::vector<int>> rows(16, std::vector<int>(16));
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) rows[i][j] = t.counts[i][j];
    return rows;
  });

  m.def("selected_differentials", [] { return DiffClassSet::selected().deltas; });
  m.def(
      "shift_family",
      [](std::uint64_t base, const std::vector<int>& shifts) {
        return DiffClassSet::shift_family(base, shifts).deltas;
      },
      py::arg("base"), py::arg("nibble_shifts"));
  m.def(
      "random_differentials",
      [](std::size_t t, std::uint64_t seed) { return DiffClassSet::random_set(t, seed).deltas; },
      py::arg("t"), py::arg("seed"));

  m.def(
      "generate_dataset",
      [](const std::string& cipher, int rounds, const std::vector<std::uint64_t>& deltas,
         std::uint64_t pairs, std::uint64_t seed) {
        const DiffDataset ds = generate_dataset(cipher_from_name(cipher), rounds,
                                                set_from_deltas(deltas), pairs, seed);
        std::vector<std::pair<std::uint64_t, int>> out;
        out.reserve(ds.samples.size());
        for (const DiffSample& s : ds.samples) out.emplace_back(s.out_diff, s.label);
        return out;
      },
      py::arg("cipher"), py::arg("rounds"), py::arg("deltas"), py::arg("pairs"), py::arg("seed"),
      "labeled (out_diff, class) records; rounds=0 is the identity debug pipeline");

  m.def(
      "write_dataset_csv",
      [](const std::string& cipher, int rounds, const std::vector<std::uint64_t>& deltas,
         std::uint64_t pairs, std::uint64_t seed, const std::string& path) {
        write_dataset_csv(generate_dataset(cipher_from_name(cipher), rounds,
                                           set_from_deltas(deltas), pairs, seed),
                          path);
      },
      py::arg("cipher"), py::arg("rounds"), py::arg("deltas"), py::arg("pairs"), py::arg("seed"),
      py::arg("path"));

  m.def(
      "train_distinguisher",
      [](const std::string& cipher, int rounds, const std::vector<std::uint64_t>& deltas,
         std::uint64_t pairs, std::uint64_t seed, const std::string& preset, double lr, int epochs,
         int batch, double val_fraction, const std::string& loss) {
        const CipherKind kind = cipher_from_name(cipher);
        const DiffClassSet classes = set_from_deltas(deltas);
        const DiffDataset data = generate_dataset(kind, rounds, classes, pairs, derive_seed(seed, 1));
        const SplitIndices split = split_train_val(data, val_fraction, derive_seed(seed, 2));
        const FeatureMatrix train_set = featurize(data, split.train);
        const FeatureMatrix val_set = featurize(data, split.val);
        TrainConfig cfg = config_from_kwargs(lr, epochs, batch, val_fraction, derive_seed(seed, 3), loss);
        Mlp<float> model =
            init_model<float>(MlpArch::preset(preset, static_cast<int>(classes.t())),
                              derive_seed(cfg.seed, 0x696E6974ULL));
        const TrainReport report = train_mlp(model, train_set, val_set, cfg);
        py::dict out;
        out["final_val_acc"] = report.final_val_acc;
        out["val_acc"] = report.val_acc;
        out["train_loss"] = report.train_loss;
        out["diverged"] = report.diverged;
        return out;
      },
      py::arg("cipher"), py::arg("rounds"), py::arg("deltas"), py::arg("pairs"), py::arg("seed"),
      py::arg("preset") = "proposed", py::arg("lr") = 0.001, py::arg("epochs") = 25,
      py::arg("batch") = 100, py::arg("val_fraction") = 0.3, py::arg("loss") = "bce");

  m.def(
      "distinguish",
      [](const std::string& cipher, int rounds, const std::string& oracle, std::uint64_t pairs,
         std::uint64_t query_pairs, std::uint64_t seed, const std::string& preset) {
        const CipherKind kind = cipher_from_name(cipher);
        const DiffClassSet classes = DiffClassSet::selected();
        OfflineOptions options;
        options.pair_count = pairs;
        options.arch_preset = preset;
        const OfflineResult offline = offline_phase(kind, rounds, classes, options, seed);
        py::dict out;
        out["offline_alpha"] = offline.alpha;
        out["offline_attempts"] = offline.attempts;
        out["offline_success"] = offline.success;
        if (offline.success) {
          const std::uint64_t oracle_seed = derive_seed(seed, 0x73657373ULL);
          const Oracle o = oracle == "random" ? Oracle::random(oracle_seed)
                                              : Oracle::cipher(kind, rounds, oracle_seed);
          const OnlineReport online = online_phase(offline.model, o, classes, query_pairs,
                                                   derive_seed(seed, 0x71727973ULL));
          out["alpha_prime"] = online.alpha_prime;
          out["threshold"] = online.threshold;
          out["verdict"] = online.verdict == Verdict::Cipher ? "cipher" : "random";
        }
        return out;
      },
      py::arg("cipher"), py::arg("rounds"), py::arg("oracle") = "cipher",
      py::arg("pairs") = 10000, py::arg("query_pairs") = 1000, py::arg("seed") = 1,
      py::arg("preset") = "proposed");

  m.def(
      "decide",
      [](double alpha_prime, std::size_t t, std::size_t n_records, double z) {
        return decide(alpha_prime, t, n_records, DecisionPolicy{z}) == Verdict::Cipher
                   ? "cipher"
                   : "random";
      },
      py::arg("alpha_prime"), py::arg("t"), py::arg("n_records"), py::arg("z") = 3.0);

  m.def("chi_square_sf", &chi_square_sf, py::arg("x"), py::arg("df"));
}
