// diffdist command-line workbench.
//
// Subcommands: kat, ddt, gen-data, train, evaluate, distinguish, grid, plot.
// Every subcommand accepts --config FILE with flat key=value lines mirroring
// its flags (the grid subcommand also writes one back next to its results).
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diffdist/ddt.hpp"
#include "diffdist/distinguisher.hpp"
#include "diffdist/experiment.hpp"
#include "diffdist/parallel.hpp"

namespace fs = std::filesystem;
using namespace diffdist;

namespace {

std::vector<CipherKind> parse_cipher_selector(const std::string& s) {
  if (s == "both") return {CipherKind::Present, CipherKind::Simeck};
  return {cipher_from_name(s)};
}

// "R" or "A..B"
std::pair<int, int> parse_round_range(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const int r = std::stoi(s);
    return {r, r};
  }
  return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
}

std::vector<std::string> split_tags(const std::string& s) {
  std::vector<std::string> tags;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) tags.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) tags.push_back(cur);
  return tags;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

struct CommonTrainFlags {
  double lr = 0.001;
  int epochs = 25;
  int batch = 100;
  double val_frac = 0.3;
  std::string loss = "bce";

  void attach(CLI::App* cmd) {
    cmd->add_option("--lr", lr, "learning rate");
    cmd->add_option("--epochs", epochs, "training epochs");
    cmd->add_option("--batch", batch, "mini-batch size");
    cmd->add_option("--val-frac", val_frac, "validation split fraction");
    cmd->add_option("--loss", loss, "loss function: bce|softmax")
        ->check(CLI::IsMember({"bce", "softmax"}));
  }
  TrainConfig to_config(std::uint64_t seed) const {
    TrainConfig cfg;
    cfg.learning_rate = lr;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.val_fraction = val_frac;
    cfg.seed = seed;
    cfg.loss = loss == "bce" ? LossKind::Bce : LossKind::SoftmaxXent;
    return cfg;
  }
};

int cmd_kat(const std::string& kat_dir) {
  const KatReport report = kat_check(kat_dir);
  for (const std::string& f : report.failures) std::cout << "FAIL " << f << "\n";
  std::cout << (report.ok() ? "kat: all checks passed (" : "kat: FAILED (")
            << report.passed << " passed, " << report.failures.size() << " failed)\n";
  return report.ok() ? 0 : 1;
}

int cmd_ddt(bool csv, const std::string& out_path) {
  const DdtTable table = present_sbox_ddt();
  std::ostringstream os;
  if (csv) {
    os << "din\\dout";
    for (int j = 0; j < 16; ++j) os << ',' << j;
    os << '\n';
    for (int i = 0; i < 16; ++i) {
      os << i;
      for (int j = 0; j < 16; ++j) os << ',' << table.counts[i][j];
      os << '\n';
    }
  } else {
    os << "PRESENT S-box difference distribution table (input rows, output columns)\n";
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%3d", table.counts[i][j]);
        os << buf << (j == 15 ? "\n" : " ");
      }
    }
  }
  if (out_path.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error(out_path + ": cannot open for writing");
    out << os.str();
    std::cout << "ddt: wrote " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neural differential distinguisher workbench for PRESENT-80 and Simeck64/128"};
  app.require_subcommand(1);

  // ---- kat ----
  auto* kat = app.add_subcommand("kat", "run the bundled known-answer vectors");
  std::string kat_dir = "data";
  kat->add_option("--kat-dir", kat_dir, "directory with the KAT fixture files");
  kat->set_config("--config");

  // ---- ddt ----
  auto* ddt = app.add_subcommand("ddt", "print the PRESENT S-box difference distribution table");
  bool ddt_csv = false;
  std::string ddt_out;
  ddt->add_flag("--csv", ddt_csv, "emit CSV instead of aligned text");
  ddt->add_option("--out", ddt_out, "write to a file instead of stdout");
  ddt->set_config("--config");

  // ---- gen-data ----
  auto* gen = app.add_subcommand("gen-data", "generate a labeled output-difference dataset");
  std::string gen_cipher = "present", gen_rounds = "3", gen_diffs = "selected", gen_out;
  std::uint64_t gen_pairs = 10000, gen_seed = 1;
  std::size_t gen_classes = 4;
  gen->add_option("--cipher", gen_cipher, "present|simeck")->check(CLI::IsMember({"present", "simeck"}));
  gen->add_option("--rounds", gen_rounds, "round count (0 = identity debug pipeline)");
  gen->add_option("--diffs", gen_diffs, "selected|random|family:<hexbase>:<shifts>|file:<path>");
  gen->add_option("--classes", gen_classes, "class count t for random differentials");
  gen->add_option("--pairs", gen_pairs, "number of (P, K) pairs");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output CSV path")->required();
  gen->set_config("--config");

  // ---- train ----
  auto* train = app.add_subcommand("train", "train a distinguisher on a dataset file");
  std::string train_data, train_model = "proposed", train_out;
  std::uint64_t train_seed = 1;
  CommonTrainFlags train_flags;
  train->add_option("--data", train_data, "dataset CSV (with .meta sidecar)")->required();
  train->add_option("--model", train_model, "architecture preset: proposed|baksi")
      ->check(CLI::IsMember({"proposed", "baksi"}));
  train->add_option("--seed", train_seed, "training seed (init + shuffle)");
  train->add_option("--out", train_out, "model container output path");
  train_flags.attach(train);
  train->set_config("--config");

  // ---- evaluate ----
  auto* eval = app.add_subcommand("evaluate", "accuracy of a saved model on a dataset file");
  std::string eval_model, eval_data;
  eval->add_option("--model", eval_model, "model container path")->required();
  eval->add_option("--data", eval_data, "dataset CSV path")->required();
  eval->set_config("--config");

  // ---- distinguish ----
  auto* dist = app.add_subcommand("distinguish", "offline training plus online oracle decision");
  std::string dist_cipher = "present", dist_diffs = "selected", dist_model = "proposed",
              dist_oracle = "cipher";
  int dist_rounds = 3, dist_retries = 3;
  std::uint64_t dist_pairs = 10000, dist_query_pairs = 1000, dist_seed = 1;
  double dist_z = 3.0;
  CommonTrainFlags dist_flags;
  dist->add_option("--cipher", dist_cipher, "present|simeck")->check(CLI::IsMember({"present", "simeck"}));
  dist->add_option("--rounds", dist_rounds, "reduced round count");
  dist->add_option("--diffs", dist_diffs, "differential mode");
  dist->add_option("--model", dist_model, "architecture preset: proposed|baksi")
      ->check(CLI::IsMember({"proposed", "baksi"}));
  dist->add_option("--oracle", dist_oracle, "online oracle: cipher|random")
      ->check(CLI::IsMember({"cipher", "random"}));
  dist->add_option("--pairs", dist_pairs, "offline (P, K) pairs");
  dist->add_option("--query-pairs", dist_query_pairs, "online query pairs");
  dist->add_option("--retries", dist_retries, "offline retry budget");
  dist->add_option("--z", dist_z, "decision threshold in null standard deviations");
  dist->add_option("--seed", dist_seed, "master seed");
  dist_flags.attach(dist);
  dist->set_config("--config");

  // ---- grid ----
  auto* grid = app.add_subcommand("grid", "run a (cipher x rounds x model x trial) experiment grid");
  std::string grid_cipher = "present", grid_rounds = "3..6", grid_models = "m4",
              grid_model_preset, grid_diffs, grid_out = "out";
  int grid_trials = 5;
  std::uint64_t grid_pairs = 10000, grid_seed = 1;
  bool grid_timing = false;
  CommonTrainFlags grid_flags;
  grid->add_option("--cipher", grid_cipher, "present|simeck|both")
      ->check(CLI::IsMember({"present", "simeck", "both"}));
  grid->add_option("--rounds", grid_rounds, "round range R or A..B");
  grid->add_option("--models", grid_models, "comma list of model tags m1..m4");
  grid->add_option("--model", grid_model_preset,
                   "explicit architecture preset (overrides --models, needs --diffs)");
  grid->add_option("--diffs", grid_diffs, "differential mode for --model");
  grid->add_option("--trials", grid_trials, "trials per cell");
  grid->add_option("--pairs", grid_pairs, "(P, K) pairs per dataset");
  grid->add_option("--seed", grid_seed, "master seed");
  grid->add_option("--out", grid_out, "output directory");
  grid->add_flag("--timing", grid_timing, "record measured wall_ms (breaks byte-reproducibility)");
  grid_flags.attach(grid);
  grid->set_config("--config");

  // ---- plot ----
  auto* plot = app.add_subcommand("plot", "accuracy-by-rounds SVG from a results CSV");
  std::string plot_in, plot_out = "accuracy.svg";
  std::size_t plot_t = 4;
  plot->add_option("--in", plot_in, "results CSV path")->required();
  plot->add_option("--out", plot_out, "output SVG path (per-cipher suffix added when needed)");
  plot->add_option("--t", plot_t, "class count for the chance reference line");
  plot->set_config("--config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*kat) return cmd_kat(kat_dir);
    if (*ddt) return cmd_ddt(ddt_csv, ddt_out);

    if (*gen) {
      const CipherKind cipher = cipher_from_name(gen_cipher);
      const int rounds = std::stoi(gen_rounds);
      DiffSpec spec = DiffSpec::parse(gen_diffs);
      spec.t = gen_classes;
      const DiffClassSet classes = build_class_set(spec, derive_seed(gen_seed, 0x636C7373ULL));
      const DiffDataset data = generate_dataset(cipher, rounds, classes, gen_pairs, gen_seed);
      write_dataset_csv(data, gen_out);
      std::cout << "gen-data: wrote " << data.samples.size() << " records to " << gen_out
                << " (+ sidecar " << dataset_meta_path(gen_out).string() << ")\n";
      return 0;
    }

    if (*train) {
      const DiffDataset data = read_dataset_csv(train_data);
      const TrainConfig cfg = train_flags.to_config(train_seed);
      const SplitIndices split = split_train_val(data, cfg.val_fraction, derive_seed(train_seed, 2));
      const FeatureMatrix train_set = featurize(data, split.train);
      const FeatureMatrix val_set = featurize(data, split.val);
      const MlpArch arch = MlpArch::preset(train_model, static_cast<int>(data.classes.t()));
      Mlp<float> model = init_model<float>(arch, derive_seed(cfg.seed, 0x696E6974ULL));
      const TrainReport report = train_mlp(model, train_set, val_set, cfg);
      for (std::size_t e = 0; e < report.val_acc.size(); ++e)
        std::cout << "epoch " << e + 1 << ": train_loss=" << fmt4(report.train_loss[e])
                  << " train_acc=" << fmt4(report.train_acc[e])
                  << " val_acc=" << fmt4(report.val_acc[e]) << "\n";
      if (report.diverged) {
        std::cout << "train: FAILED (non-finite loss)\n";
        return 1;
      }
      std::cout << "train: final validation accuracy " << fmt4(report.final_val_acc) << "\n";
      if (!train_out.empty()) {
        save_model(model, train_out);
        std::cout << "train: wrote model to " << train_out << "\n";
      }
      return 0;
    }

    if (*eval) {
      const Mlp<float> model = load_model(eval_model);
      const DiffDataset data = read_dataset_csv(eval_data);
      std::vector<std::uint32_t> all(data.samples.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
      const double acc = evaluate_accuracy(model, featurize(data, all));
      std::cout << "evaluate: accuracy " << fmt4(acc) << " on " << all.size() << " records\n";
      return 0;
    }

    if (*dist) {
      const CipherKind cipher = cipher_from_name(dist_cipher);
      const DiffClassSet classes =
          build_class_set(DiffSpec::parse(dist_diffs), derive_seed(dist_seed, 0x636C7373ULL));
      OfflineOptions options;
      options.pair_count = dist_pairs;
      options.train = dist_flags.to_config(dist_seed);
      options.max_attempts = dist_retries;
      options.policy.z = dist_z;
      options.arch_preset = dist_model;
      const OfflineResult offline = offline_phase(cipher, dist_rounds, classes, options, dist_seed);
      std::cout << "offline: alpha=" << fmt4(offline.alpha) << " after " << offline.attempts
                << " attempt(s)\n";
      if (!offline.success) {
        std::cout << "offline: no distinguisher found for this configuration (alpha at chance "
                     "level); skipping online phase\n";
        return 0;
      }
      const std::uint64_t oracle_seed = derive_seed(dist_seed, 0x73657373ULL);
      const Oracle oracle = dist_oracle == "cipher"
                                ? Oracle::cipher(cipher, dist_rounds, oracle_seed)
                                : Oracle::random(oracle_seed);
      const OnlineReport online = online_phase(offline.model, oracle, classes, dist_query_pairs,
                                               derive_seed(dist_seed, 0x71727973ULL),
                                               DecisionPolicy{dist_z});
      std::cout << "online: alpha'=" << fmt4(online.alpha_prime) << " over " << online.records
                << " records, threshold " << fmt4(online.threshold) << " (z=" << dist_z << ")\n";
      std::cout << "verdict: " << (online.verdict == Verdict::Cipher ? "CIPHER" : "RANDOM")
                << " (oracle was " << dist_oracle << ")\n";
      return 0;
    }

    if (*grid) {
      ExperimentConfig cfg;
      cfg.ciphers = parse_cipher_selector(grid_cipher);
      std::tie(cfg.rounds_lo, cfg.rounds_hi) = parse_round_range(grid_rounds);
      if (!grid_model_preset.empty()) {
        if (grid_diffs.empty())
          throw std::invalid_argument("--model requires --diffs");
        GridModel m;
        m.arch_preset = grid_model_preset;
        m.diffs = DiffSpec::parse(grid_diffs);
        m.tag = grid_model_preset + "-" + grid_diffs;
        cfg.models = {m};
      } else {
        for (const std::string& tag : split_tags(grid_models))
          cfg.models.push_back(GridModel::from_tag(tag));
      }
      cfg.trials = grid_trials;
      cfg.pair_count = grid_pairs;
      cfg.master_seed = grid_seed;
      cfg.include_timing = grid_timing;
      cfg.train = grid_flags.to_config(0);  // per-cell seeds are derived in run_grid

      fs::create_directories(grid_out);
      const std::vector<ResultRow> rows = run_grid(cfg);
      const fs::path csv_path = fs::path(grid_out) / "results.csv";
      emit_csv(rows, csv_path);
      std::cout << "grid: wrote " << rows.size() << " rows to " << csv_path.string() << "\n";

      // a config mirror that reproduces this run via --config
      {
        std::ofstream cfg_out(fs::path(grid_out) / "config.ini", std::ios::binary);
        cfg_out << "cipher=" << grid_cipher << "\nrounds=" << grid_rounds;
        if (!grid_model_preset.empty())
          cfg_out << "\nmodel=" << grid_model_preset << "\ndiffs=" << grid_diffs;
        else
          cfg_out << "\nmodels=" << grid_models;
        cfg_out << "\ntrials=" << grid_trials << "\npairs=" << grid_pairs << "\nseed=" << grid_seed
                << "\nout=" << grid_out << "\nlr=" << grid_flags.lr
                << "\nepochs=" << grid_flags.epochs << "\nbatch=" << grid_flags.batch
                << "\nval-frac=" << grid_flags.val_frac << "\nloss=" << grid_flags.loss << "\n";
        if (grid_timing) cfg_out << "timing=true\n";
      }

      if (cfg.rounds_lo < cfg.rounds_hi) {
        for (CipherKind cipher : cfg.ciphers) {
          std::vector<ResultRow> subset;
          for (const ResultRow& r : rows)
            if (r.cipher == cipher) subset.push_back(r);
          const fs::path svg_path =
              fs::path(grid_out) / ("accuracy_" + std::string(cipher_name(cipher)) + ".svg");
          emit_round_plot(subset, svg_path, 4);
          std::cout << "grid: wrote " << svg_path.string() << "\n";
        }
      }
      return 0;
    }

    if (*plot) {
      // minimal results-CSV reader for the plot subcommand
      std::ifstream in(plot_in);
      if (!in) throw std::runtime_error(plot_in + ": cannot open");
      std::string line;
      if (!std::getline(in, line) || line.rfind("cipher,rounds,model,", 0) != 0)
        throw std::runtime_error(plot_in + ": not a results CSV");
      std::vector<ResultRow> rows;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        ResultRow r;
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        r.cipher = cipher_from_name(field);
        std::getline(ss, field, ',');
        r.rounds = std::stoi(field);
        std::getline(ss, r.model, ',');
        std::getline(ss, field, ',');
        r.trial = std::stoi(field);
        std::getline(ss, field, ',');
        r.seed = std::stoull(field);
        std::getline(ss, field, ',');
        r.val_acc_min = std::stod(field);
        std::getline(ss, field, ',');
        r.val_acc_max = std::stod(field);
        std::getline(ss, field, ',');
        r.val_acc_final = std::stod(field);
        r.failed = std::isnan(r.val_acc_final);
        rows.push_back(r);
      }
      std::set<CipherKind> ciphers;
      for (const ResultRow& r : rows) ciphers.insert(r.cipher);
      if (ciphers.size() == 1) {
        emit_round_plot(rows, plot_out, plot_t);
        std::cout << "plot: wrote " << plot_out << "\n";
      } else {
        for (CipherKind cipher : ciphers) {
          std::vector<ResultRow> subset;
          for (const ResultRow& r : rows)
            if (r.cipher == cipher) subset.push_back(r);
          fs::path p(plot_out);
          const fs::path out = p.parent_path() /
                               (p.stem().string() + "_" + std::string(cipher_name(cipher)) +
                                p.extension().string());
          emit_round_plot(subset, out, plot_t);
          std::cout << "plot: wrote " << out.string() << "\n";
        }
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
