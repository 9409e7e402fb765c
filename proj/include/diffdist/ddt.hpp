// Classical baseline: exact S-box difference distribution tables and
// empirical multi-round output-difference statistics with a chi-square test.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "diffdist/cipher.hpp"

namespace diffdist {

struct DdtTable {
  // counts[din][dout] = #{ x : S(x) ^ S(x ^ din) = dout }
  std::array<std::array<int, 16>, 16> counts{};

  int max_entry_nonzero_input() const;
};

// Exact 256-pair enumeration. Throws std::invalid_argument for non-bijective tables.
DdtTable sbox_ddt(std::span<const std::uint8_t, 16> sbox);

DdtTable present_sbox_ddt();

// Bucketing of a 64-bit output difference. Full histograms over 2^64 values
// are intractable, so results always carry the projection they were built with.
enum class Projection {
  ActiveNibbles,  // bucket = number of nonzero nibbles (17 buckets)
  LowBits,        // bucket = low k bits (2^k buckets)
};

struct Histogram {
  Projection projection = Projection::LowBits;
  int low_bits = 8;  // only used by LowBits
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  void add(Block64 value);
  std::size_t bucket_of(Block64 value) const;
};

Histogram make_histogram(Projection projection, int low_bits = 8);

// Histogram of the projected difference E_r(P) ^ E_r(P ^ delta) over random
// (P, K). rounds == 0 projects delta itself (identity debug pipeline).
Histogram empirical_diff_distribution(CipherKind cipher, int rounds, Block64 delta,
                                      std::uint64_t samples, Projection projection,
                                      int low_bits, std::uint64_t seed);

struct ChiSquareReport {
  double statistic = 0.0;
  int df = 0;
  std::uint64_t samples = 0;
  std::size_t buckets = 0;
  double p_value = 1.0;
  double alpha = 1e-3;
  bool reject = false;
};

// Pearson statistic against the uniform null. Requires total >= 5 * buckets.
ChiSquareReport chi_square_uniform(const Histogram& hist, double alpha = 1e-3);

// Upper tail P(X >= x) of the chi-square distribution with df degrees of freedom.
double chi_square_sf(double x, int df);

}  // namespace diffdist
