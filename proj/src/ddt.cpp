#include "diffdist/ddt.hpp"

#include <cmath>
#include <stdexcept>

namespace diffdist {

int DdtTable::max_entry_nonzero_input() const {
  int best = 0;
  for (int din = 1; din < 16; ++din)
    for (int dout = 0; dout < 16; ++dout)
      if (counts[static_cast<std::size_t>(din)][static_cast<std::size_t>(dout)] > best)
        best = counts[static_cast<std::size_t>(din)][static_cast<std::size_t>(dout)];
  return best;
}

DdtTable sbox_ddt(std::span<const std::uint8_t, 16> sbox) {
  std::array<bool, 16> seen{};
  for (auto v : sbox) {
    if (v > 15 || seen[v]) throw std::invalid_argument("sbox_ddt: table is not a 4-bit bijection");
    seen[v] = true;
  }
  DdtTable t;
  for (int x = 0; x < 16; ++x)
    for (int din = 0; din < 16; ++din)
      ++t.counts[static_cast<std::size_t>(din)]
                [sbox[static_cast<std::size_t>(x)] ^ sbox[static_cast<std::size_t>(x ^ din)]];
  return t;
}

DdtTable present_sbox_ddt() {
  std::array<std::uint8_t, 16> s{};
  for (int i = 0; i < 16; ++i) s[static_cast<std::size_t>(i)] = present::sbox(static_cast<std::uint8_t>(i));
  return sbox_ddt(s);
}

std::size_t Histogram::bucket_of(Block64 value) const {
  if (projection == Projection::ActiveNibbles) return static_cast<std::size_t>(active_nibbles(value));
  return static_cast<std::size_t>(value & ((1ULL << low_bits) - 1));
}

void Histogram::add(Block64 value) {
  ++counts[bucket_of(value)];
  ++total;
}

Histogram make_histogram(Projection projection, int low_bits) {
  Histogram h;
  h.projection = projection;
  h.low_bits = low_bits;
  if (projection == Projection::LowBits && (low_bits < 1 || low_bits > 20))
    throw std::invalid_argument("LowBits projection supports 1..20 bits");
  h.counts.assign(projection == Projection::ActiveNibbles ? 17 : (1ULL << low_bits), 0);
  return h;
}

Histogram empirical_diff_distribution(CipherKind cipher, int rounds, Block64 delta,
                                      std::uint64_t samples, Projection projection,
                                      int low_bits, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("empirical_diff_distribution: samples must be >= 1");
  if (delta == 0) throw std::invalid_argument("empirical_diff_distribution: delta must be nonzero");
  if (rounds != 0 && (rounds < 1 || rounds > max_rounds(cipher)))
    throw std::out_of_range("empirical_diff_distribution: rounds out of range");
  Histogram h = make_histogram(projection, low_bits);
  for (std::uint64_t i = 0; i < samples; ++i) {
    SplitMix64 rng(derive_seed(seed, i));
    if (rounds == 0) {
      h.add(delta);
      continue;
    }
    const Block64 p = rng.next();
    const CipherKey key = CipherKey::random(cipher, rng);
    const Block64 d = encrypt(cipher, p, key, rounds) ^ encrypt(cipher, p ^ delta, key, rounds);
    h.add(d);
  }
  return h;
}

ChiSquareReport chi_square_uniform(const Histogram& hist, double alpha) {
  const std::size_t buckets = hist.counts.size();
  if (hist.total < 5 * buckets)
    throw std::invalid_argument("chi_square_uniform: need at least 5 samples per bucket");
  const double expected = static_cast<double>(hist.total) / static_cast<double>(buckets);
  double stat = 0.0;
  for (std::uint64_t c : hist.counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  ChiSquareReport r;
  r.statistic = stat;
  r.df = static_cast<int>(buckets) - 1;
  r.samples = hist.total;
  r.buckets = buckets;
  r.alpha = alpha;
  r.p_value = chi_square_sf(stat, r.df);
  r.reject = r.p_value < alpha;
  return r;
}

namespace {

// Regularized incomplete gamma P(a, x) by series, Q(a, x) by continued
// fraction (Lentz). Standard formulation; accurate enough for test decisions.
double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 1; n < 500; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double chi_square_sf(double x, int df) {
  if (x <= 0.0) return 1.0;
  const double a = 0.5 * df;
  const double half = 0.5 * x;
  if (half < a + 1.0) return 1.0 - gamma_p_series(a, half);
  return gamma_q_contfrac(a, half);
}

}  // namespace diffdist
