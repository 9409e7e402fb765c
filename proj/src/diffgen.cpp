#include "diffdist/diffgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace diffdist {

namespace {

Block64 shift_nibbles(Block64 v, int nibbles) {
  const int bits = 4 * (nibbles < 0 ? -nibbles : nibbles);
  if (bits >= 64) return 0;
  return nibbles >= 0 ? v << bits : v >> bits;
}

[[noreturn]] void io_fail(const std::filesystem::path& p, const std::string& what) {
  throw std::runtime_error(p.string() + ": " + what);
}

}  // namespace

void DiffClassSet::validate() const {
  if (deltas.size() < 2) throw std::invalid_argument("class set needs t >= 2 differentials");
  std::set<Block64> distinct;
  for (Block64 d : deltas) {
    if (d == 0) throw std::invalid_argument("class set contains a zero differential");
    if (!distinct.insert(d).second)
      throw std::invalid_argument("class set contains duplicate differential " + to_hex(d));
  }
}

DiffClassSet DiffClassSet::selected() {
  DiffClassSet s;
  s.deltas = {0x0700000000000700ULL, 0x7000000000007000ULL, 0x0070000000000070ULL,
              0x0007000000000007ULL};
  return s;
}

DiffClassSet DiffClassSet::shift_family(Block64 base, std::span<const int> nibble_shifts) {
  if (base == 0) throw std::invalid_argument("shift_family: base must be nonzero");
  DiffClassSet s;
  if (std::find(nibble_shifts.begin(), nibble_shifts.end(), 0) == nibble_shifts.end())
    s.deltas.push_back(base);
  for (int sh : nibble_shifts) {
    const Block64 v = shift_nibbles(base, sh);
    if (v == 0)
      throw std::invalid_argument("shift_family: shift by " + std::to_string(sh) +
                                  " nibbles produces zero");
    s.deltas.push_back(v);
  }
  s.validate();
  return s;
}

DiffClassSet DiffClassSet::random_set(std::size_t t, std::uint64_t seed) {
  if (t < 2) throw std::invalid_argument("random_set: t must be >= 2");
  DiffClassSet s;
  SplitMix64 rng(derive_seed(seed, 0x64696666ULL));
  std::set<Block64> seen;
  while (s.deltas.size() < t) {
    const Block64 d = rng.next();
    if (d != 0 && seen.insert(d).second) s.deltas.push_back(d);
  }
  return s;
}

DiffClassSet DiffClassSet::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open differential file");
  DiffClassSet s;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const auto end = line.find_last_not_of(" \t\r");
    s.deltas.push_back(parse_hex64(std::string_view(line).substr(begin, end - begin + 1)));
  }
  s.validate();
  return s;
}

DiffDataset generate_dataset(CipherKind cipher, int rounds, const DiffClassSet& classes,
                             std::uint64_t pair_count, std::uint64_t seed) {
  classes.validate();
  if (pair_count < 1) throw std::invalid_argument("generate_dataset: pair_count must be >= 1");
  if (rounds != 0 && (rounds < 1 || rounds > max_rounds(cipher)))
    throw std::out_of_range("generate_dataset: rounds out of range");

  DiffDataset ds;
  ds.cipher = cipher;
  ds.rounds = rounds;
  ds.classes = classes;
  ds.pair_count = pair_count;
  ds.seed = seed;

  const std::size_t t = classes.t();
  ds.samples.resize(pair_count * t);
  for (std::uint64_t i = 0; i < pair_count; ++i) {
    SplitMix64 rng(derive_seed(seed, i));
    const Block64 p = rng.next();
    DiffSample* out = ds.samples.data() + i * t;
    if (rounds == 0) {
      for (std::size_t c = 0; c < t; ++c)
        out[c] = {classes.deltas[c], static_cast<std::uint16_t>(c)};
      continue;
    }
    const CipherKey key = CipherKey::random(cipher, rng);
    const Block64 ct = encrypt(cipher, p, key, rounds);
    for (std::size_t c = 0; c < t; ++c) {
      const Block64 ci = encrypt(cipher, p ^ classes.deltas[c], key, rounds);
      out[c] = {ct ^ ci, static_cast<std::uint16_t>(c)};
    }
  }
  return ds;
}

std::filesystem::path dataset_meta_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p += ".meta";
  return p;
}

void write_dataset_csv(const DiffDataset& dataset, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) io_fail(csv_path, "cannot open for writing");
  out << "out_diff_hex,label\n";
  for (const DiffSample& s : dataset.samples)
    out << to_hex(s.out_diff) << ',' << s.label << '\n';
  if (!out) io_fail(csv_path, "write failed");

  const auto meta_path = dataset_meta_path(csv_path);
  std::ofstream meta(meta_path, std::ios::binary);
  if (!meta) io_fail(meta_path, "cannot open for writing");
  meta << "cipher=" << cipher_name(dataset.cipher) << '\n';
  meta << "rounds=" << dataset.rounds << '\n';
  meta << "deltas=";
  for (std::size_t i = 0; i < dataset.classes.t(); ++i) {
    if (i) meta << ',';
    meta << to_hex(dataset.classes.deltas[i]);
  }
  meta << '\n';
  meta << "seed=" << dataset.seed << '\n';
  meta << "pair_count=" << dataset.pair_count << '\n';
  if (!meta) io_fail(meta_path, "write failed");
}

DiffDataset read_dataset_csv(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) io_fail(csv_path, "cannot open dataset");
  DiffDataset ds;
  std::string line;
  if (!std::getline(in, line) || line != "out_diff_hex,label")
    io_fail(csv_path, "missing out_diff_hex,label header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) io_fail(csv_path, "malformed row: " + line);
    DiffSample s;
    s.out_diff = parse_hex64(std::string_view(line).substr(0, comma));
    s.label = static_cast<std::uint16_t>(std::stoul(line.substr(comma + 1)));
    ds.samples.push_back(s);
  }

  const auto meta_path = dataset_meta_path(csv_path);
  std::ifstream meta(meta_path, std::ios::binary);
  if (!meta) io_fail(meta_path, "missing dataset sidecar metadata");
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "cipher") ds.cipher = cipher_from_name(value);
    else if (key == "rounds") ds.rounds = std::stoi(value);
    else if (key == "seed") ds.seed = std::stoull(value);
    else if (key == "pair_count") ds.pair_count = std::stoull(value);
    else if (key == "deltas") {
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) ds.classes.deltas.push_back(parse_hex64(item));
    }
  }
  ds.classes.validate();
  for (const DiffSample& s : ds.samples)
    if (s.label >= ds.classes.t()) io_fail(csv_path, "label out of range of class set");
  return ds;
}

void encode_features(const DiffSample& sample, float* out64) {
  for (int j = 0; j < 64; ++j) out64[j] = static_cast<float>((sample.out_diff >> j) & 1ULL);
}

SplitIndices split_train_val(const DiffDataset& dataset, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0) || !(val_fraction < 1.0))
    throw std::invalid_argument("split_train_val: val_fraction must be in (0, 1)");
  const std::size_t t = dataset.classes.t();
  std::vector<std::vector<std::uint32_t>> by_label(t);
  for (std::size_t i = 0; i < dataset.samples.size(); ++i)
    by_label[dataset.samples[i].label].push_back(static_cast<std::uint32_t>(i));

  SplitIndices split;
  for (std::size_t c = 0; c < t; ++c) {
    auto& idx = by_label[c];
    SplitMix64 rng(derive_seed(seed, 0x73706C69ULL, c));
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.next_below(i)]);
    const std::size_t n_val =
        static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(idx.size())));
    split.val.insert(split.val.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    split.train.insert(split.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  }
  return split;
}

}  // namespace diffdist
