// Input-differential selection and labeled dataset generation.
//
// A dataset row is one (output difference, class index) record. For each of
// pair_count fresh random (P, K) draws, every class delta contributes one
// record (C ^ C_i, i), so the labels are exactly balanced. Generation is
// deterministic for a fixed seed; pair i only touches the substream
// derive_seed(seed, i), so disjoint index ranges can be produced in parallel
// with bit-identical output.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "diffdist/cipher.hpp"

namespace diffdist {

struct DiffClassSet {
  std::vector<Block64> deltas;  // class index = position; all nonzero, pairwise distinct

  std::size_t t() const { return deltas.size(); }

  // The four-differential set used by the selected-differential presets,
  // 0x0700000000000700, 0x7000000000007000, 0x0070000000000070, 0x0007000000000007.
  static DiffClassSet selected();

  // base shifted by whole nibbles, non-circular (bits shifted out are lost).
  // The base itself is prepended when 0 is not among the shifts. Throws on a
  // zero base, a shift that produces zero, or duplicate values.
  static DiffClassSet shift_family(Block64 base, std::span<const int> nibble_shifts);

  // t distinct nonzero uniform deltas; deterministic per seed.
  static DiffClassSet random_set(std::size_t t, std::uint64_t seed);

  // One hex delta per line; '#' comments allowed.
  static DiffClassSet from_file(const std::filesystem::path& path);

  void validate() const;  // throws std::invalid_argument on any broken invariant
};

struct DiffSample {
  Block64 out_diff = 0;
  std::uint16_t label = 0;
};

struct DiffDataset {
  std::vector<DiffSample> samples;
  CipherKind cipher = CipherKind::Present;
  int rounds = 0;
  DiffClassSet classes;
  std::uint64_t pair_count = 0;
  std::uint64_t seed = 0;
};

// rounds == 0 is the identity debug pipeline: out_diff == delta_label exactly.
DiffDataset generate_dataset(CipherKind cipher, int rounds, const DiffClassSet& classes,
                             std::uint64_t pair_count, std::uint64_t seed);

// CSV with header `out_diff_hex,label` plus a sidecar `<path>.meta` block with
// cipher, rounds, deltas, seed and pair_count.
void write_dataset_csv(const DiffDataset& dataset, const std::filesystem::path& csv_path);
DiffDataset read_dataset_csv(const std::filesystem::path& csv_path);
std::filesystem::path dataset_meta_path(const std::filesystem::path& csv_path);

// 64 features, feature j = bit j of out_diff as 0.0f/1.0f.
void encode_features(const DiffSample& sample, float* out64);

struct SplitIndices {
  std::vector<std::uint32_t> train;
  std::vector<std::uint32_t> val;
};

// Stratified by label with a seeded shuffle; per-class split sizes are within
// one record of the exact fraction. Throws unless 0 < val_fraction < 1.
SplitIndices split_train_val(const DiffDataset& dataset, double val_fraction, std::uint64_t seed);

}  // namespace diffdist
