#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>

#include "diffdist/ddt.hpp"
#include "diffdist/diffgen.hpp"

using namespace diffdist;
namespace fs = std::filesystem;

TEST_CASE("shift family reproduces the selected differential set") {
  const Block64 base = 0x0007000000000007ULL;

  SUBCASE("shifts {0,1,2,3} give exactly the four selected values") {
    const int shifts[] = {0, 1, 2, 3};
    const DiffClassSet fam = DiffClassSet::shift_family(base, shifts);
    REQUIRE(fam.t() == 4);
    CHECK(fam.deltas[0] == 0x0007000000000007ULL);
    CHECK(fam.deltas[1] == 0x0070000000000070ULL);
    CHECK(fam.deltas[2] == 0x0700000000000700ULL);
    CHECK(fam.deltas[3] == 0x7000000000007000ULL);
    std::set<Block64> got(fam.deltas.begin(), fam.deltas.end());
    const DiffClassSet sel = DiffClassSet::selected();
    CHECK(got == std::set<Block64>(sel.deltas.begin(), sel.deltas.end()));
  }
  SUBCASE("base is prepended when 0 is not among the shifts") {
    const int shifts[] = {1};
    const DiffClassSet fam = DiffClassSet::shift_family(base, shifts);
    REQUIRE(fam.t() == 2);
    CHECK(fam.deltas[0] == base);
    CHECK(fam.deltas[1] == 0x0070000000000070ULL);
  }
  SUBCASE("single shifts hit the published classes") {
    const int s2[] = {2};
    CHECK(DiffClassSet::shift_family(base, s2).deltas[1] == 0x0700000000000700ULL);
    const int s3[] = {3};
    CHECK(DiffClassSet::shift_family(base, s3).deltas[1] == 0x7000000000007000ULL);
  }
  SUBCASE("rejects zero base, zero results and duplicates") {
    const int shifts[] = {1};
    CHECK_THROWS_AS(DiffClassSet::shift_family(0, shifts), std::invalid_argument);
    const int overshift[] = {16};
    CHECK_THROWS_AS(DiffClassSet::shift_family(base, overshift), std::invalid_argument);
    const int dup[] = {1, 1};
    CHECK_THROWS_AS(DiffClassSet::shift_family(base, dup), std::invalid_argument);
    // bits drop off the edge: a right shift can zero a low-weight base
    const int down[] = {-1};
    CHECK_THROWS_AS(DiffClassSet::shift_family(0x7ULL, down), std::invalid_argument);
  }
}

TEST_CASE("random class sets are seeded and distinct") {
  const DiffClassSet a = DiffClassSet::random_set(4, 99);
  const DiffClassSet b = DiffClassSet::random_set(4, 99);
  CHECK(a.deltas == b.deltas);
  REQUIRE(a.t() == 4);
  std::set<Block64> uniq(a.deltas.begin(), a.deltas.end());
  CHECK(uniq.size() == 4);
  for (Block64 d : a.deltas) CHECK(d != 0);

  // different seeds give different sets (birthday check over 100 seeds)
  std::set<std::vector<Block64>> sets;
  for (std::uint64_t s = 0; s < 100; ++s) sets.insert(DiffClassSet::random_set(4, s).deltas);
  CHECK(sets.size() == 100);

  CHECK_THROWS_AS(DiffClassSet::random_set(1, 1), std::invalid_argument);
}

TEST_CASE("dataset generation follows the chosen-plaintext procedure") {
  const DiffClassSet classes = DiffClassSet::selected();

  SUBCASE("identity pipeline recovers the deltas exactly") {
    const DiffDataset ds = generate_dataset(CipherKind::Present, 0, classes, 50, 7);
    REQUIRE(ds.samples.size() == 200);
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      CHECK(ds.samples[i].out_diff == classes.deltas[ds.samples[i].label]);
      CHECK(ds.samples[i].out_diff != 0);
    }
  }
  SUBCASE("label balance and record count") {
    const DiffDataset ds = generate_dataset(CipherKind::Simeck, 3, classes, 250, 8);
    CHECK(ds.samples.size() == 1000);
    std::map<int, int> counts;
    for (const auto& s : ds.samples) ++counts[s.label];
    REQUIRE(counts.size() == 4);
    for (const auto& [label, n] : counts) CHECK(n == 250);
  }
  SUBCASE("determinism and seed sensitivity") {
    const DiffDataset a = generate_dataset(CipherKind::Present, 3, classes, 100, 9);
    const DiffDataset b = generate_dataset(CipherKind::Present, 3, classes, 100, 9);
    const DiffDataset c = generate_dataset(CipherKind::Present, 3, classes, 100, 10);
    REQUIRE(a.samples.size() == b.samples.size());
    bool equal = true, differs = false;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      equal = equal && a.samples[i].out_diff == b.samples[i].out_diff;
      differs = differs || a.samples[i].out_diff != c.samples[i].out_diff;
    }
    CHECK(equal);
    CHECK(differs);
  }
  SUBCASE("round-range errors propagate") {
    CHECK_THROWS_AS(generate_dataset(CipherKind::Present, 32, classes, 10, 1), std::out_of_range);
    CHECK_THROWS_AS(generate_dataset(CipherKind::Simeck, 45, classes, 10, 1), std::out_of_range);
    CHECK_THROWS_AS(generate_dataset(CipherKind::Present, 3, classes, 0, 1), std::invalid_argument);
  }
}

TEST_CASE("one-round present datasets are measurably non-uniform") {
  const DiffDataset ds =
      generate_dataset(CipherKind::Present, 1, DiffClassSet::selected(), 25000, 11);
  Histogram h = make_histogram(Projection::LowBits, 4);
  for (const auto& s : ds.samples) h.add(s.out_diff);
  const ChiSquareReport r = chi_square_uniform(h, 1e-6);
  CHECK(r.reject);
  CHECK(r.p_value < 1e-6);
}

TEST_CASE("feature encoding") {
  float f[64];
  encode_features({0, 0}, f);
  for (int j = 0; j < 64; ++j) CHECK(f[j] == 0.0f);
  encode_features({1ULL << 63, 0}, f);
  for (int j = 0; j < 63; ++j) CHECK(f[j] == 0.0f);
  CHECK(f[63] == 1.0f);
  encode_features({0x8000000000000001ULL, 0}, f);
  CHECK(f[0] == 1.0f);
  CHECK(f[63] == 1.0f);
}

TEST_CASE("dataset CSV round-trip is bit-exact") {
  const DiffDataset ds = generate_dataset(CipherKind::Simeck, 2, DiffClassSet::selected(), 50, 12);
  const fs::path path = fs::temp_directory_path() / "diffdist_test_dataset.csv";
  write_dataset_csv(ds, path);
  const DiffDataset back = read_dataset_csv(path);
  REQUIRE(back.samples.size() == ds.samples.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    CHECK(back.samples[i].out_diff == ds.samples[i].out_diff);
    CHECK(back.samples[i].label == ds.samples[i].label);
  }
  CHECK(back.cipher == ds.cipher);
  CHECK(back.rounds == ds.rounds);
  CHECK(back.classes.deltas == ds.classes.deltas);
  CHECK(back.seed == ds.seed);
  CHECK(back.pair_count == ds.pair_count);
  fs::remove(path);
  fs::remove(dataset_meta_path(path));
}

TEST_CASE("stratified train/val split") {
  const DiffDataset ds = generate_dataset(CipherKind::Present, 2, DiffClassSet::selected(), 1000, 13);

  SUBCASE("sizes match the published split") {
    const SplitIndices split = split_train_val(ds, 0.3, 5);
    CHECK(split.train.size() == 2800);
    CHECK(split.val.size() == 1200);
    // per-label balance within one record
    std::map<int, int> val_counts;
    for (auto i : split.val) ++val_counts[ds.samples[i].label];
    for (const auto& [label, n] : val_counts) CHECK(std::abs(n - 300) <= 1);
    // partition: no index in both halves
    std::set<std::uint32_t> train_set(split.train.begin(), split.train.end());
    for (auto i : split.val) CHECK(train_set.count(i) == 0);
    CHECK(train_set.size() + split.val.size() == ds.samples.size());
  }
  SUBCASE("same seed gives the identical partition") {
    const SplitIndices a = split_train_val(ds, 0.3, 6);
    const SplitIndices b = split_train_val(ds, 0.3, 6);
    CHECK(a.train == b.train);
    CHECK(a.val == b.val);
  }
  SUBCASE("degenerate fractions are rejected") {
    CHECK_THROWS_AS(split_train_val(ds, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(split_train_val(ds, 1.0, 1), std::invalid_argument);
  }
}
