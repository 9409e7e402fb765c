#include <doctest.h>

#include <array>

#include "diffdist/ddt.hpp"

using namespace diffdist;

TEST_CASE("present sbox DDT invariants") {
  const DdtTable t = present_sbox_ddt();
  CHECK(t.counts[0][0] == 16);
  for (int dout = 1; dout < 16; ++dout) CHECK(t.counts[0][dout] == 0);
  for (int din = 0; din < 16; ++din) {
    int row = 0;
    for (int dout = 0; dout < 16; ++dout) {
      CHECK(t.counts[din][dout] % 2 == 0);
      row += t.counts[din][dout];
    }
    CHECK(row == 16);
  }
  CHECK(t.max_entry_nonzero_input() == 4);
}

TEST_CASE("DDT invariants hold for random 4-bit permutations") {
  SplitMix64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<std::uint8_t, 16> sbox{};
    for (int i = 0; i < 16; ++i) sbox[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
    for (std::size_t i = 16; i > 1; --i) std::swap(sbox[i - 1], sbox[rng.next_below(i)]);
    const DdtTable t = sbox_ddt(sbox);
    CHECK(t.counts[0][0] == 16);
    for (int din = 0; din < 16; ++din) {
      int row = 0;
      for (int dout = 0; dout < 16; ++dout) {
        CHECK(t.counts[din][dout] % 2 == 0);
        row += t.counts[din][dout];
      }
      CHECK(row == 16);
    }
  }
}

TEST_CASE("sbox_ddt rejects non-bijective tables") {
  std::array<std::uint8_t, 16> bad{};
  for (auto& v : bad) v = 3;
  CHECK_THROWS_AS(sbox_ddt(bad), std::invalid_argument);
}

TEST_CASE("chi-square against uniform: closed-form cases") {
  Histogram h = make_histogram(Projection::LowBits, 4);
  SUBCASE("perfectly uniform counts give statistic 0") {
    for (auto& c : h.counts) c = 100;
    h.total = 1600;
    const ChiSquareReport r = chi_square_uniform(h);
    CHECK(r.statistic == doctest::Approx(0.0));
    CHECK(r.df == 15);
    CHECK_FALSE(r.reject);
  }
  SUBCASE("all mass in one of 16 buckets") {
    h.counts[0] = 1600;
    h.total = 1600;
    const ChiSquareReport r = chi_square_uniform(h);
    CHECK(r.statistic == doctest::Approx(24000.0));
    CHECK(r.df == 15);
    CHECK(r.reject);
  }
  SUBCASE("undersampled histograms are rejected") {
    h.counts[0] = 10;
    h.total = 10;
    CHECK_THROWS_AS(chi_square_uniform(h), std::invalid_argument);
  }
}

TEST_CASE("chi-square survival function sanity") {
  // df=2 has the closed form exp(-x/2)
  CHECK(chi_square_sf(4.0, 2) == doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
  CHECK(chi_square_sf(10.0, 2) == doctest::Approx(std::exp(-5.0)).epsilon(1e-10));
  // standard critical value: P(X >= 7.8147) ~ 0.05 for df=3
  CHECK(chi_square_sf(7.8147, 3) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(chi_square_sf(0.0, 5) == doctest::Approx(1.0));
}

TEST_CASE("empirical difference distribution") {
  SUBCASE("identity pipeline puts all mass in delta's bucket") {
    const Block64 delta = 0x0007000000000007ULL;
    const Histogram h =
        empirical_diff_distribution(CipherKind::Present, 0, delta, 2048, Projection::LowBits, 4, 1);
    CHECK(h.total == 2048);
    CHECK(h.counts[h.bucket_of(delta)] == 2048);
  }
  SUBCASE("one-round present with the family base is strongly non-uniform") {
    const Histogram h = empirical_diff_distribution(CipherKind::Present, 1, 0x0007000000000007ULL,
                                                    100000, Projection::LowBits, 4, 2);
    std::uint64_t mx = 0, mn = UINT64_MAX;
    for (auto c : h.counts) {
      mx = c > mx ? c : mx;
      mn = c < mn ? c : mn;
    }
    CHECK(mx > 2 * (mn + 1));
    CHECK(chi_square_uniform(h).reject);
  }
  SUBCASE("uniform random data stays near uniform") {
    Histogram h = make_histogram(Projection::LowBits, 6);
    SplitMix64 rng(33);
    for (int i = 0; i < 100000; ++i) h.add(rng.next());
    const ChiSquareReport r = chi_square_uniform(h, 1e-6);
    CHECK_FALSE(r.reject);
  }
  SUBCASE("rejects bad arguments") {
    CHECK_THROWS(empirical_diff_distribution(CipherKind::Present, 1, 0, 100, Projection::LowBits, 4, 1));
    CHECK_THROWS(empirical_diff_distribution(CipherKind::Present, 99, 1, 100, Projection::LowBits, 4, 1));
  }
}

TEST_CASE("chi-square statistic decays with rounds on the selected base differential") {
  // distinguishability ordering: the trial-mean statistic should not increase
  // from 1 to 2 to 3 rounds
  const Block64 delta = 0x0007000000000007ULL;
  double mean[3] = {0, 0, 0};
  const int trials = 10;
  for (int r = 1; r <= 3; ++r)
    for (int s = 0; s < trials; ++s) {
      const Histogram h = empirical_diff_distribution(
          CipherKind::Present, r, delta, 20000, Projection::LowBits, 4,
          derive_seed(100, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(s)));
      mean[r - 1] += chi_square_uniform(h).statistic / trials;
    }
  CHECK(mean[0] >= mean[1]);
  CHECK(mean[1] >= mean[2]);
}
