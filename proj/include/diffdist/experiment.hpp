// Experiment orchestration: the (cipher x rounds x model x trial) grid with
// reproducible per-cell seeds, the results CSV, the accuracy-vs-rounds SVG
// plot and the bundled known-answer check.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "diffdist/distinguisher.hpp"

namespace diffdist {

enum class DiffMode { Selected, Random, Family, File };

struct DiffSpec {
  DiffMode mode = DiffMode::Selected;
  std::size_t t = 4;  // class count for Random
  Block64 family_base = 0;
  std::vector<int> family_shifts;
  std::filesystem::path file;

  // Parses selected | random | family:<hexbase>:<s0,s1,...> | file:<path>.
  static DiffSpec parse(const std::string& text);
  std::string to_string() const;
};

// Random and File class sets are resolved per call; Random uses the given seed.
DiffClassSet build_class_set(const DiffSpec& spec, std::uint64_t seed);

struct GridModel {
  std::string tag;          // column value in the results CSV
  std::string arch_preset;  // proposed | baksi
  DiffSpec diffs;

  // m1 = baksi+random, m2 = proposed+random, m3 = baksi+selected, m4 = proposed+selected
  static GridModel from_tag(const std::string& tag);
};

struct ExperimentConfig {
  std::vector<CipherKind> ciphers = {CipherKind::Present};
  int rounds_lo = 3;
  int rounds_hi = 6;
  std::vector<GridModel> models;
  int trials = 5;
  std::uint64_t pair_count = 10000;
  TrainConfig train;
  std::uint64_t master_seed = 1;
  bool include_timing = false;  // keep the default results CSV byte-reproducible

  void validate() const;
};

struct ResultRow {
  CipherKind cipher = CipherKind::Present;
  int rounds = 0;
  std::string model;
  int trial = 0;
  std::uint64_t seed = 0;
  double val_acc_min = 0.0;
  double val_acc_max = 0.0;
  double val_acc_final = 0.0;
  double wall_ms = 0.0;
  bool failed = false;  // non-finite loss; accuracies are reported as nan
};

// Runs every cell; failures become flagged rows, never lost rows. Cells run
// in parallel; output order and all reported numbers depend only on
// (config, master_seed).
std::vector<ResultRow> run_grid(const ExperimentConfig& config);

// Header: cipher,rounds,model,trial,seed,val_acc_min,val_acc_max,val_acc_final,wall_ms
std::string csv_string(std::span<const ResultRow> rows);
void emit_csv(std::span<const ResultRow> rows, const std::filesystem::path& path);

// Self-contained SVG: one curve per model tag, x = rounds, y = trial-mean
// final accuracy, dashed reference line at 1/t. Rows must cover >= 2 rounds
// and a single cipher.
void emit_round_plot(std::span<const ResultRow> rows, const std::filesystem::path& path,
                     std::size_t t);

struct KatReport {
  int passed = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty() && passed > 0; }
};

// Runs the fixture vectors (full-round PRESENT-80 and Simeck64/128) plus
// encrypt/decrypt round trips; any mismatch names the offending vector.
KatReport kat_check(const std::filesystem::path& kat_dir);

}  // namespace diffdist
