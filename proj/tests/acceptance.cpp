// Acceptance suite: runs each criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exit code 0 iff every requested
// criterion passed. Usage: acceptance [N ...] with N in 1..7 (default: all).
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "diffdist/ddt.hpp"
#include "diffdist/distinguisher.hpp"
#include "diffdist/experiment.hpp"
#include "diffdist/parallel.hpp"

using namespace diffdist;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) {
    detail += (detail.empty() ? "" : "; ") + what;
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// ---- criterion 1: cipher correctness ---------------------------------------

Outcome criterion1() {
  Outcome out;
  const auto start = Clock::now();
  const KatReport report = kat_check(DIFFDIST_DATA_DIR);
  for (const auto& f : report.failures) out.require(false, f);
  out.require(report.passed >= 1005, "expected all KAT vectors plus 1000 round trips");
  const double elapsed = seconds_since(start);
  out.require(elapsed < 5.0, "runtime " + fmt(elapsed, 2) + "s exceeds 5s");
  out.note(std::to_string(report.passed) + " checks in " + fmt(elapsed, 2) + "s");
  return out;
}

// ---- criterion 2: DDT properties --------------------------------------------

Outcome criterion2() {
  Outcome out;
  const auto start = Clock::now();
  const DdtTable t = present_sbox_ddt();
  out.require(t.counts[0][0] == 16, "entry [0][0] must be 16");
  for (int din = 0; din < 16; ++din) {
    int row = 0;
    for (int dout = 0; dout < 16; ++dout) {
      row += t.counts[din][dout];
      if (t.counts[din][dout] % 2 != 0) out.require(false, "odd DDT entry");
    }
    if (row != 16) out.require(false, "row sum != 16");
  }
  out.require(t.max_entry_nonzero_input() == 4, "max nonzero-input entry must be 4");
  const double elapsed = seconds_since(start);
  out.require(elapsed < 1.0, "runtime exceeds 1s");
  out.note("max entry 4, all rows sum 16, " + fmt(elapsed, 3) + "s");
  return out;
}

// ---- criterion 3: gradient oracle -------------------------------------------

double loss_at(const Mlp<double>& model, const std::vector<double>& x, std::size_t batch,
               const std::vector<double>& y) {
  ForwardCache<double> cache;
  forward_batch(model, x.data(), batch, cache);
  return bce_loss(cache.act.back().data(), y.data(),
                  batch * static_cast<std::size_t>(model.arch.output_dim));
}

Outcome criterion3() {
  Outcome out;
  const auto start = Clock::now();
  double worst = 0.0;
  int checked = 0;
  const double h = 1e-5;
  for (std::uint64_t probe = 0; probe < 20; ++probe) {
    const MlpArch arch{8, {6, 5}, 3};
    Mlp<double> model = init_model<double>(arch, derive_seed(31337, probe));
    SplitMix64 rng(derive_seed(404, probe));
    const std::size_t batch = 4;
    std::vector<double> x(batch * 8);
    for (auto& v : x) v = 2.0 * rng.next_unit() - 1.0;
    std::vector<double> y(batch * 3, 0.0);
    for (std::size_t i = 0; i < batch; ++i) y[i * 3 + rng.next_below(3)] = 1.0;

    ForwardCache<double> cache;
    forward_batch(model, x.data(), batch, cache);
    Gradients<double> grads;
    backward_batch(model, x.data(), batch, cache, y.data(), grads);

    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      auto& w = model.weights[l];
      for (std::size_t idx = 0; idx < w.size(); idx += 1 + w.size() / 3) {
        const double saved = w[idx];
        w[idx] = saved + h;
        const double up = loss_at(model, x, batch, y);
        w[idx] = saved - h;
        const double down = loss_at(model, x, batch, y);
        w[idx] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double an = grads.weights[l][idx];
        const double rel = std::fabs(fd - an) / std::max({std::fabs(fd), std::fabs(an), 1e-8});
        worst = std::max(worst, rel);
        ++checked;
      }
    }
  }
  out.require(checked >= 100, "need at least 100 probes, got " + std::to_string(checked));
  out.require(worst < 1e-4, "max relative error " + fmt(worst, 8));
  const double elapsed = seconds_since(start);
  out.require(elapsed < 30.0, "runtime exceeds 30s");
  out.note(std::to_string(checked) + " probes, max rel err " + fmt(worst, 8) + ", " +
           fmt(elapsed, 2) + "s");
  return out;
}

// ---- criterion 4: validation-accuracy bands ---------------------------------

std::vector<ResultRow> run_cells(CipherKind cipher, int r_lo, int r_hi,
                                 const std::vector<std::string>& tags, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.ciphers = {cipher};
  cfg.rounds_lo = r_lo;
  cfg.rounds_hi = r_hi;
  for (const auto& tag : tags) cfg.models.push_back(GridModel::from_tag(tag));
  cfg.trials = 5;
  cfg.pair_count = 10000;  // published hyper-parameters
  cfg.master_seed = seed;
  cfg.include_timing = true;
  return run_grid(cfg);
}

double mean_final(const std::vector<ResultRow>& rows, const std::string& tag = "",
                  int rounds = -1) {
  double sum = 0;
  int n = 0;
  for (const auto& r : rows) {
    if (!tag.empty() && r.model != tag) continue;
    if (rounds >= 0 && r.rounds != rounds) continue;
    sum += r.val_acc_final;
    ++n;
  }
  return n ? sum / n : 0.0;
}

Outcome criterion4() {
  Outcome out;
  const auto start = Clock::now();
  double max_cell_ms = 0;
  const auto track = [&](const std::vector<ResultRow>& rows) {
    for (const auto& r : rows) {
      max_cell_ms = std::max(max_cell_ms, r.wall_ms);
      if (r.failed) out.require(false, "training cell failed (non-finite loss)");
    }
  };

  // PRESENT r=3, selected differentials, both architectures
  const auto p3 = run_cells(CipherKind::Present, 3, 3, {"m3", "m4"}, 101);
  track(p3);
  for (const auto& r : p3)
    out.require(r.val_acc_final >= 0.65,
                "present r3 " + r.model + " trial " + std::to_string(r.trial) + " final " +
                    fmt(r.val_acc_final) + " < 0.65");
  out.require(mean_final(p3) >= 0.75, "present r3 mean " + fmt(mean_final(p3)) + " < 0.75");
  out.note("present r3 mean " + fmt(mean_final(p3)));

  // Simeck r=2 and r=3, selected differentials
  const auto s23 = run_cells(CipherKind::Simeck, 2, 3, {"m4"}, 102);
  track(s23);
  for (int r : {2, 3})
    out.require(mean_final(s23, "m4", r) >= 0.95,
                "simeck r" + std::to_string(r) + " mean " + fmt(mean_final(s23, "m4", r)) +
                    " < 0.95");
  out.note("simeck r2 mean " + fmt(mean_final(s23, "m4", 2)) + ", r3 mean " +
           fmt(mean_final(s23, "m4", 3)));

  // limiting band at r=6 for both ciphers
  const auto p6 = run_cells(CipherKind::Present, 6, 6, {"m4"}, 103);
  const auto s6 = run_cells(CipherKind::Simeck, 6, 6, {"m4"}, 104);
  track(p6);
  track(s6);
  for (const auto* rows : {&p6, &s6})
    for (const auto& r : *rows)
      out.require(r.val_acc_final >= 0.13 && r.val_acc_final <= 0.42,
                  std::string(cipher_name(r.cipher)) + " r6 trial " + std::to_string(r.trial) +
                      " final " + fmt(r.val_acc_final) + " outside [0.13, 0.42]");
  out.note("r6 means " + fmt(mean_final(p6)) + " / " + fmt(mean_final(s6)));

  // random-differential presets at r=4 stay weak
  const auto p4 = run_cells(CipherKind::Present, 4, 4, {"m1", "m2"}, 105);
  const auto s4 = run_cells(CipherKind::Simeck, 4, 4, {"m1", "m2"}, 106);
  track(p4);
  track(s4);
  out.require(mean_final(p4) <= 0.45, "present r4 random-diff mean " + fmt(mean_final(p4)));
  out.require(mean_final(s4) <= 0.45, "simeck r4 random-diff mean " + fmt(mean_final(s4)));
  out.note("random-diff r4 means " + fmt(mean_final(p4)) + " / " + fmt(mean_final(s4)));

  out.require(max_cell_ms < 180000.0,
              "slowest cell " + fmt(max_cell_ms / 1000.0, 1) + "s exceeds the 3 min budget");
  out.note("slowest cell " + fmt(max_cell_ms / 1000.0, 1) + "s, total " +
           fmt(seconds_since(start) / 60.0, 1) + " min");
  return out;
}

// ---- criterion 5: distinguisher protocol ------------------------------------

Outcome criterion5() {
  Outcome out;
  const auto start = Clock::now();

  OfflineOptions options;  // published hyper-parameters
  const OfflineResult present_model =
      offline_phase(CipherKind::Present, 3, DiffClassSet::selected(), options, 201);
  out.require(present_model.success,
              "offline present r3 found no distinguisher (alpha " + fmt(present_model.alpha) + ")");
  const OfflineResult simeck_model =
      offline_phase(CipherKind::Simeck, 3, DiffClassSet::selected(), options, 202);
  out.require(simeck_model.success,
              "offline simeck r3 found no distinguisher (alpha " + fmt(simeck_model.alpha) + ")");
  out.note("offline alphas " + fmt(present_model.alpha) + " / " + fmt(simeck_model.alpha));
  if (!out.pass) return out;

  // false positives: 1000 seeded online sessions against true RANDOM oracles
  std::atomic<int> false_cipher{0};
  parallel_for(1000, [&](std::size_t begin, std::size_t end) {
    for (std::size_t trial = begin; trial < end; ++trial) {
      const Oracle oracle = Oracle::random(derive_seed(301, trial));
      const OnlineReport rep = online_phase(present_model.model, oracle, present_model.classes,
                                            1000, derive_seed(302, trial));
      if (rep.verdict == Verdict::Cipher) false_cipher.fetch_add(1);
    }
  });
  out.require(false_cipher.load() <= 10, "false CIPHER verdicts " +
                                             std::to_string(false_cipher.load()) + "/1000 > 1%");
  out.note(std::to_string(false_cipher.load()) + "/1000 false positives");

  // true positives: 100 sessions per cipher against CIPHER oracles
  const auto run_tp = [&](CipherKind cipher, const OfflineResult& offline) {
    std::atomic<int> correct{0};
    parallel_for(100, [&](std::size_t begin, std::size_t end) {
      for (std::size_t trial = begin; trial < end; ++trial) {
        const Oracle oracle = Oracle::cipher(cipher, 3, derive_seed(303, trial));
        const OnlineReport rep =
            online_phase(offline.model, oracle, offline.classes, 1000, derive_seed(304, trial));
        if (rep.verdict == Verdict::Cipher) correct.fetch_add(1);
      }
    });
    return correct.load();
  };
  const int tp_present = run_tp(CipherKind::Present, present_model);
  const int tp_simeck = run_tp(CipherKind::Simeck, simeck_model);
  out.require(tp_present >= 95, "present r3 correct verdicts " + std::to_string(tp_present) + "/100");
  out.require(tp_simeck >= 95, "simeck r3 correct verdicts " + std::to_string(tp_simeck) + "/100");
  out.note("correct verdicts " + std::to_string(tp_present) + "/100 and " +
           std::to_string(tp_simeck) + "/100");

  const double elapsed = seconds_since(start);
  out.require(elapsed < 600.0, "runtime " + fmt(elapsed, 1) + "s exceeds 10 min");
  out.note(fmt(elapsed, 1) + "s");
  return out;
}

// ---- criterion 6: grid determinism -------------------------------------------

Outcome criterion6() {
  Outcome out;
  ExperimentConfig cfg;
  cfg.ciphers = {CipherKind::Simeck};
  cfg.rounds_lo = 2;
  cfg.rounds_hi = 3;
  cfg.models = {GridModel::from_tag("m4"), GridModel::from_tag("m2")};
  cfg.trials = 1;
  cfg.pair_count = 400;
  cfg.train.epochs = 3;
  cfg.master_seed = 777;

  const fs::path dir = fs::temp_directory_path() / "diffdist_acceptance_c6";
  fs::create_directories(dir);
  const auto rows_a = run_grid(cfg);
  const auto rows_b = run_grid(cfg);
  emit_csv(rows_a, dir / "a.csv");
  emit_csv(rows_b, dir / "b.csv");
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string a = slurp(dir / "a.csv");
  const std::string b = slurp(dir / "b.csv");
  out.require(!a.empty() && a == b, "repeated grid runs produced different CSV bytes");
  out.note(std::to_string(rows_a.size()) + " rows byte-identical across reruns");
  fs::remove_all(dir);
  return out;
}

// ---- criterion 7: shift-family reproduction ----------------------------------

Outcome criterion7() {
  Outcome out;
  const int shifts[] = {0, 1, 2, 3};
  const DiffClassSet fam = DiffClassSet::shift_family(0x0007000000000007ULL, shifts);
  const std::set<Block64> got(fam.deltas.begin(), fam.deltas.end());
  const std::set<Block64> want = {0x0700000000000700ULL, 0x7000000000007000ULL,
                                  0x0070000000000070ULL, 0x0007000000000007ULL};
  out.require(fam.t() == 4, "family size != 4");
  out.require(got == want, "family does not reproduce the published differential set");
  out.note("base 0007000000000007 with shifts {0,+1,+2,+3} reproduces all four differentials");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> criteria;
  for (int i = 1; i < argc; ++i) criteria.push_back(std::atoi(argv[i]));
  if (criteria.empty()) criteria = {1, 2, 3, 4, 5, 6, 7};

  const char* names[] = {"",
                         "cipher correctness (KATs + round trips)",
                         "DDT properties",
                         "gradient oracle vs finite differences",
                         "validation-accuracy band reproduction",
                         "distinguisher protocol error rates",
                         "grid determinism",
                         "shift-family differential generation"};
  const std::function<Outcome()> runners[] = {nullptr,    criterion1, criterion2, criterion3,
                                              criterion4, criterion5, criterion6, criterion7};

  bool all_pass = true;
  for (int c : criteria) {
    if (c < 1 || c > 7) {
      std::fprintf(stderr, "unknown criterion %d\n", c);
      return 2;
    }
    Outcome out;
    try {
      out = runners[c]();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s (%s)\n", out.pass ? "PASS" : "FAIL", c, names[c],
                out.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && out.pass;
  }
  return all_pass ? 0 : 1;
}
