#include "diffdist/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "diffdist/parallel.hpp"

namespace diffdist {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

[[noreturn]] void io_fail(const std::filesystem::path& p, const std::string& what) {
  throw std::runtime_error(p.string() + ": " + what);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

}  // namespace

DiffSpec DiffSpec::parse(const std::string& text) {
  DiffSpec spec;
  if (text == "selected") {
    spec.mode = DiffMode::Selected;
    return spec;
  }
  if (text == "random") {
    spec.mode = DiffMode::Random;
    return spec;
  }
  if (text.rfind("family:", 0) == 0) {
    const auto parts = split_on(text.substr(7), ':');
    if (parts.size() != 2)
      throw std::invalid_argument("family spec must be family:<hexbase>:<s0,s1,...>");
    spec.mode = DiffMode::Family;
    spec.family_base = parse_hex64(parts[0]);
    for (const auto& s : split_on(parts[1], ','))
      spec.family_shifts.push_back(std::stoi(s));
    return spec;
  }
  if (text.rfind("file:", 0) == 0) {
    spec.mode = DiffMode::File;
    spec.file = text.substr(5);
    return spec;
  }
  throw std::invalid_argument("unknown differential mode: " + text);
}

std::string DiffSpec::to_string() const {
  switch (mode) {
    case DiffMode::Selected: return "selected";
    case DiffMode::Random: return "random";
    case DiffMode::Family: {
      std::string s = "family:" + to_hex(family_base) + ":";
      for (std::size_t i = 0; i < family_shifts.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(family_shifts[i]);
      }
      return s;
    }
    case DiffMode::File: return "file:" + file.string();
  }
  return "?";
}

DiffClassSet build_class_set(const DiffSpec& spec, std::uint64_t seed) {
  switch (spec.mode) {
    case DiffMode::Selected: return DiffClassSet::selected();
    case DiffMode::Random: return DiffClassSet::random_set(spec.t, seed);
    case DiffMode::Family: return DiffClassSet::shift_family(spec.family_base, spec.family_shifts);
    case DiffMode::File: return DiffClassSet::from_file(spec.file);
  }
  throw std::logic_error("unreachable");
}

GridModel GridModel::from_tag(const std::string& tag) {
  GridModel m;
  m.tag = tag;
  if (tag == "m1") {
    m.arch_preset = "baksi";
    m.diffs.mode = DiffMode::Random;
  } else if (tag == "m2") {
    m.arch_preset = "proposed";
    m.diffs.mode = DiffMode::Random;
  } else if (tag == "m3") {
    m.arch_preset = "baksi";
    m.diffs.mode = DiffMode::Selected;
  } else if (tag == "m4") {
    m.arch_preset = "proposed";
    m.diffs.mode = DiffMode::Selected;
  } else {
    throw std::invalid_argument("unknown model tag: " + tag + " (expected m1..m4)");
  }
  return m;
}

void ExperimentConfig::validate() const {
  if (ciphers.empty()) throw std::invalid_argument("grid: no cipher selected");
  if (models.empty()) throw std::invalid_argument("grid: no models selected");
  if (trials < 1) throw std::invalid_argument("grid: trials must be >= 1");
  if (pair_count < 1) throw std::invalid_argument("grid: pair_count must be >= 1");
  if (rounds_lo < 1 || rounds_lo > rounds_hi) throw std::invalid_argument("grid: bad round range");
  for (CipherKind c : ciphers)
    if (rounds_hi > max_rounds(c))
      throw std::invalid_argument(std::string("grid: rounds exceed ") + std::string(cipher_name(c)) +
                                  " maximum of " + std::to_string(max_rounds(c)));
  train.validate();
}

std::vector<ResultRow> run_grid(const ExperimentConfig& config) {
  config.validate();

  struct Cell {
    CipherKind cipher;
    int rounds;
    const GridModel* model;
    int trial;
  };
  std::vector<Cell> cells;
  for (CipherKind cipher : config.ciphers)
    for (const GridModel& model : config.models)
      for (int r = config.rounds_lo; r <= config.rounds_hi; ++r)
        for (int trial = 0; trial < config.trials; ++trial)
          cells.push_back({cipher, r, &model, trial});

  std::vector<ResultRow> rows(cells.size());
  parallel_for(cells.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Cell& cell = cells[i];
      ResultRow& row = rows[i];
      row.cipher = cell.cipher;
      row.rounds = cell.rounds;
      row.model = cell.model->tag;
      row.trial = cell.trial;
      // Seeds hang off the cell coordinates, not the loop position, so a
      // sub-grid reproduces the matching cells of a larger grid.
      row.seed = derive_seed(
          derive_seed(config.master_seed, static_cast<std::uint64_t>(cell.cipher),
                      fnv1a(cell.model->tag)),
          static_cast<std::uint64_t>(cell.rounds), static_cast<std::uint64_t>(cell.trial));

      const DiffClassSet classes = build_class_set(cell.model->diffs, derive_seed(row.seed, 1));
      const MlpArch arch =
          MlpArch::preset(cell.model->arch_preset, static_cast<int>(classes.t()));

      const DiffDataset data = generate_dataset(cell.cipher, cell.rounds, classes,
                                                config.pair_count, derive_seed(row.seed, 2));
      const SplitIndices split =
          split_train_val(data, config.train.val_fraction, derive_seed(row.seed, 3));
      const FeatureMatrix train_set = featurize(data, split.train);
      const FeatureMatrix val_set = featurize(data, split.val);

      TrainConfig cfg = config.train;
      cfg.seed = derive_seed(row.seed, 4);
      Mlp<float> model = init_model<float>(arch, derive_seed(cfg.seed, 0x696E6974ULL));
      const TrainReport report = train_mlp(model, train_set, val_set, cfg);

      if (report.diverged || report.val_acc.empty()) {
        row.failed = true;
        row.val_acc_min = row.val_acc_max = row.val_acc_final =
            std::numeric_limits<double>::quiet_NaN();
      } else {
        row.val_acc_min = *std::min_element(report.val_acc.begin(), report.val_acc.end());
        row.val_acc_max = *std::max_element(report.val_acc.begin(), report.val_acc.end());
        row.val_acc_final = report.final_val_acc;
      }
      row.wall_ms = config.include_timing ? report.wall_ms : 0.0;
      std::fprintf(stderr, "[grid] %s r=%d %s trial=%d -> final=%.4f (%.0f ms)\n",
                   std::string(cipher_name(cell.cipher)).c_str(), cell.rounds,
                   cell.model->tag.c_str(), cell.trial, row.val_acc_final, report.wall_ms);
    }
  });
  return rows;
}

std::string csv_string(std::span<const ResultRow> rows) {
  if (rows.empty()) throw std::invalid_argument("emit_csv: no rows");
  std::string out = "cipher,rounds,model,trial,seed,val_acc_min,val_acc_max,val_acc_final,wall_ms\n";
  char buf[256];
  for (const ResultRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%s,%d,%llu,%.4f,%.4f,%.4f,%lld\n",
                  std::string(cipher_name(r.cipher)).c_str(), r.rounds, r.model.c_str(), r.trial,
                  static_cast<unsigned long long>(r.seed), r.val_acc_min, r.val_acc_max,
                  r.val_acc_final, static_cast<long long>(std::llround(r.wall_ms)));
    out += buf;
  }
  return out;
}

void emit_csv(std::span<const ResultRow> rows, const std::filesystem::path& path) {
  const std::string text = csv_string(rows);
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open for writing");
  out << text;
  if (!out) io_fail(path, "write failed");
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

void emit_round_plot(std::span<const ResultRow> rows, const std::filesystem::path& path,
                     std::size_t t) {
  if (rows.empty()) throw std::invalid_argument("emit_round_plot: no rows");
  std::set<CipherKind> ciphers;
  for (const ResultRow& r : rows) ciphers.insert(r.cipher);
  if (ciphers.size() != 1)
    throw std::invalid_argument("emit_round_plot: rows must cover a single cipher");

  // trial means of the final accuracy per (model, round)
  std::map<std::string, std::map<int, std::pair<double, int>>> series;
  std::set<int> rounds;
  for (const ResultRow& r : rows) {
    if (r.failed) continue;
    auto& [sum, count] = series[r.model][r.rounds];
    sum += r.val_acc_final;
    count += 1;
    rounds.insert(r.rounds);
  }
  if (rounds.size() < 2)
    throw std::invalid_argument("emit_round_plot: need rows covering at least 2 rounds");

  const double width = 640, height = 440;
  const double ml = 64, mr = 24, mt = 32, mb = 56;
  const double pw = width - ml - mr, ph = height - mt - mb;
  const int r_lo = *rounds.begin(), r_hi = *rounds.rbegin();
  const auto x_of = [&](double r) { return ml + (r - r_lo) / double(r_hi - r_lo) * pw; };
  const auto y_of = [&](double acc) { return mt + (1.0 - acc) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << ml << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
      << cipher_name(*ciphers.begin()) << ": mean final validation accuracy by rounds</text>\n";
  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 10; i += 2) {
    const double acc = i / 10.0;
    svg << "<line x1=\"" << ml - 4 << "\" y1=\"" << y_of(acc) << "\" x2=\"" << ml << "\" y2=\""
        << y_of(acc) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << y_of(acc) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << acc
        << "</text>\n";
  }
  for (int r : rounds) {
    svg << "<line x1=\"" << x_of(r) << "\" y1=\"" << mt + ph << "\" x2=\"" << x_of(r) << "\" y2=\""
        << mt + ph + 4 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << x_of(r) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << r
        << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">rounds</text>\n";
  // chance-level reference at 1/t
  const double chance = 1.0 / static_cast<double>(t);
  svg << "<line x1=\"" << ml << "\" y1=\"" << y_of(chance) << "\" x2=\"" << ml + pw << "\" y2=\""
      << y_of(chance) << "\" stroke=\"#777\" stroke-dasharray=\"6,4\"/>\n";
  svg << "<text x=\"" << ml + pw << "\" y=\"" << y_of(chance) - 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#777\">1/t</text>\n";

  int color = 0;
  double legend_y = mt + 12;
  for (const auto& [tag, points] : series) {
    const char* stroke = kPalette[color % 8];
    std::ostringstream poly;
    for (const auto& [r, acc] : points) {
      const double mean = acc.first / acc.second;
      poly << x_of(r) << ',' << y_of(mean) << ' ';
    }
    svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\" points=\""
        << poly.str() << "\"/>\n";
    for (const auto& [r, acc] : points) {
      const double mean = acc.first / acc.second;
      svg << "<circle cx=\"" << x_of(r) << "\" cy=\"" << y_of(mean) << "\" r=\"3\" fill=\""
          << stroke << "\"/>\n";
    }
    svg << "<rect x=\"" << ml + pw - 110 << "\" y=\"" << legend_y - 9
        << "\" width=\"12\" height=\"4\" fill=\"" << stroke << "\"/>\n";
    svg << "<text x=\"" << ml + pw - 92 << "\" y=\"" << legend_y
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << tag << "</text>\n";
    legend_y += 16;
    ++color;
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open for writing");
  out << svg.str();
  if (!out) io_fail(path, "write failed");
}

namespace {

struct KatVector {
  std::string pt, key, ct;
  int line;
};

std::vector<KatVector> read_kat_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open KAT fixture");
  std::vector<KatVector> vectors;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::stringstream ss(line);
    KatVector v;
    v.line = line_no;
    if (ss >> v.pt >> v.key >> v.ct) vectors.push_back(v);
  }
  return vectors;
}

}  // namespace

KatReport kat_check(const std::filesystem::path& kat_dir) {
  KatReport report;

  for (const KatVector& v : read_kat_file(kat_dir / "kat_present80.txt")) {
    const Block64 pt = parse_hex64(v.pt);
    const auto key = present::key_from_hex(v.key);
    const Block64 want = parse_hex64(v.ct);
    const Block64 got = present::encrypt(pt, key, present::kMaxRounds);
    if (got == want)
      ++report.passed;
    else
      report.failures.push_back("present80 vector at line " + std::to_string(v.line) + ": got " +
                                to_hex(got) + ", expected " + to_hex(want));
  }
  for (const KatVector& v : read_kat_file(kat_dir / "kat_simeck64_128.txt")) {
    const Block64 pt = parse_hex64(v.pt);
    const auto key = simeck::key_from_hex(v.key);
    const Block64 want = parse_hex64(v.ct);
    const Block64 got = simeck::encrypt(pt, key, simeck::kMaxRounds);
    if (got == want)
      ++report.passed;
    else
      report.failures.push_back("simeck64/128 vector at line " + std::to_string(v.line) +
                                ": got " + to_hex(got) + ", expected " + to_hex(want));
  }

  // encrypt/decrypt round trips at full rounds
  SplitMix64 rng(0x4B41545F52545031ULL);
  for (int i = 0; i < 1000; ++i) {
    const Block64 pt = rng.next();
    const auto pkey = present::random_key(rng);
    if (present::decrypt(present::encrypt(pt, pkey, present::kMaxRounds), pkey,
                         present::kMaxRounds) != pt) {
      report.failures.push_back("present80 round-trip failure at iteration " + std::to_string(i));
      break;
    }
    const auto skey = simeck::random_key(rng);
    if (simeck::decrypt(simeck::encrypt(pt, skey, simeck::kMaxRounds), skey, simeck::kMaxRounds) !=
        pt) {
      report.failures.push_back("simeck64/128 round-trip failure at iteration " + std::to_string(i));
      break;
    }
    ++report.passed;
  }
  return report;
}

}  // namespace diffdist
