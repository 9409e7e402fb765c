#include "diffdist/mlp.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstring>
#include <fstream>

namespace diffdist {

MlpArch MlpArch::preset(const std::string& name, int t) {
  if (name == "proposed") return proposed(t);
  if (name == "baksi") return baksi(t);
  throw std::invalid_argument("unknown model preset: " + name);
}

void MlpArch::validate() const {
  if (input_dim < 1 || output_dim < 1)
    throw std::invalid_argument("MlpArch: dimensions must be >= 1");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("MlpArch: hidden widths must be >= 1");
}

void TrainConfig::validate() const {
  if (learning_rate <= 0) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (!(val_fraction > 0.0) || !(val_fraction < 1.0))
    throw std::invalid_argument("TrainConfig: val_fraction must be in (0, 1)");
}

FeatureMatrix featurize(const DiffDataset& dataset, std::span<const std::uint32_t> indices) {
  FeatureMatrix m;
  m.n = indices.size();
  m.dim = 64;
  m.t = dataset.classes.t();
  m.x.resize(m.n * m.dim);
  m.y.resize(m.n);
  for (std::size_t i = 0; i < m.n; ++i) {
    const DiffSample& s = dataset.samples[indices[i]];
    encode_features(s, m.x.data() + i * m.dim);
    m.y[i] = s.label;
  }
  return m;
}

namespace {

std::size_t argmax_row(const float* row, std::size_t t) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < t; ++j)
    if (row[j] > row[best]) best = j;  // ties keep the lowest index
  return best;
}

double accuracy_of(const Mlp<float>& model, const FeatureMatrix& data, LossKind loss,
                   ForwardCache<float>& cache) {
  constexpr std::size_t kChunk = 512;
  const std::size_t t = static_cast<std::size_t>(model.arch.output_dim);
  std::size_t hits = 0;
  for (std::size_t at = 0; at < data.n; at += kChunk) {
    const std::size_t b = std::min(kChunk, data.n - at);
    forward_batch(model, data.x.data() + at * data.dim, b, cache, loss);
    const float* out = cache.act.back().data();
    for (std::size_t i = 0; i < b; ++i)
      hits += argmax_row(out + i * t, t) == data.y[at + i];
  }
  return static_cast<double>(hits) / static_cast<double>(data.n);
}

}  // namespace

double evaluate_accuracy(const Mlp<float>& model, const FeatureMatrix& data) {
  if (data.n == 0) throw std::invalid_argument("evaluate_accuracy: empty dataset");
  ForwardCache<float> cache;
  return accuracy_of(model, data, LossKind::Bce, cache);
}

TrainReport train_mlp(Mlp<float>& model, const FeatureMatrix& train, const FeatureMatrix& val,
                      const TrainConfig& config) {
  config.validate();
  if (train.n == 0 || val.n == 0) throw std::invalid_argument("train_mlp: empty split");
  if (train.dim != static_cast<std::size_t>(model.arch.input_dim))
    throw std::invalid_argument("train_mlp: feature width does not match the model input");

  const auto t_start = std::chrono::steady_clock::now();
  const std::size_t t = static_cast<std::size_t>(model.arch.output_dim);
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);

  TrainReport report;
  AdamState<float> adam = make_adam_state(model);
  ForwardCache<float> cache;
  Gradients<float> grads;

  std::vector<std::uint32_t> order(train.n);
  for (std::size_t i = 0; i < train.n; ++i) order[i] = static_cast<std::uint32_t>(i);
  std::vector<float> bx(batch * train.dim);
  std::vector<float> by(batch * t);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    SplitMix64 shuffle(derive_seed(config.seed, 0x73687566ULL, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = train.n; i > 1; --i)
      std::swap(order[i - 1], order[shuffle.next_below(i)]);

    double loss_weighted = 0.0;
    std::size_t train_hits = 0;
    for (std::size_t at = 0; at < train.n; at += batch) {
      const std::size_t b = std::min(batch, train.n - at);
      for (std::size_t i = 0; i < b; ++i) {
        const std::uint32_t src = order[at + i];
        std::memcpy(bx.data() + i * train.dim, train.x.data() + src * train.dim,
                    train.dim * sizeof(float));
        std::fill(by.begin() + static_cast<std::ptrdiff_t>(i * t),
                  by.begin() + static_cast<std::ptrdiff_t>((i + 1) * t), 0.0f);
        by[i * t + train.y[src]] = 1.0f;
      }
      forward_batch(model, bx.data(), b, cache, config.loss);
      const float* out = cache.act.back().data();
      const double loss = config.loss == LossKind::Bce
                              ? bce_loss(out, by.data(), b * t)
                              : softmax_xent_loss(out, by.data(), b, t);
      if (!std::isfinite(loss)) {
        report.diverged = true;
        break;
      }
      loss_weighted += loss * static_cast<double>(b);
      for (std::size_t i = 0; i < b; ++i)
        train_hits += argmax_row(out + i * t, t) == train.y[order[at + i]];
      backward_batch(model, bx.data(), b, cache, by.data(), grads, config.loss);
      adam_step(model, grads, adam, config.learning_rate);
    }
    if (report.diverged) break;
    report.train_loss.push_back(loss_weighted / static_cast<double>(train.n));
    report.train_acc.push_back(static_cast<double>(train_hits) / static_cast<double>(train.n));
    report.val_acc.push_back(accuracy_of(model, val, config.loss, cache));
  }

  // A diverged run reports no accuracy at all rather than a stale number.
  report.final_val_acc = report.diverged || report.val_acc.empty() ? 0.0 : report.val_acc.back();
  report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
          .count();
  return report;
}

// ---- model container --------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'D', 'D', 'M', 'L', 'P', 'B', 'I', 'N'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t crc32_update(std::uint32_t crc, const void* data, std::size_t len) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int j = 0; j < 8; ++j) c = (c >> 1) ^ (0xEDB88320u & (0u - (c & 1u)));
      t[i] = c;
    }
    return t;
  }();
  const auto* p = static_cast<const unsigned char*>(data);
  crc = ~crc;
  for (std::size_t i = 0; i < len; ++i) crc = (crc >> 8) ^ table[(crc ^ p[i]) & 0xFF];
  return ~crc;
}

struct CrcWriter {
  std::ofstream& out;
  std::uint32_t crc = 0;

  void write(const void* data, std::size_t len) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    crc = crc32_update(crc, data, len);
  }
  template <class T>
  void write_pod(const T& v) {
    write(&v, sizeof(T));
  }
};

struct CrcReader {
  std::ifstream& in;
  std::uint32_t crc = 0;

  void read(void* data, std::size_t len) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(in.gcount()) != len)
      throw ModelIoError(ModelIoError::Kind::Truncated, "model file is truncated");
    crc = crc32_update(crc, data, len);
  }
  template <class T>
  T read_pod() {
    T v;
    read(&v, sizeof(T));
    return v;
  }
};

}  // namespace

void save_model(const Mlp<float>& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelIoError(ModelIoError::Kind::Io, path.string() + ": cannot open for writing");
  out.write(kMagic, sizeof(kMagic));
  CrcWriter w{out};
  w.write_pod(kVersion);
  w.write_pod(model.init_seed);
  w.write_pod(static_cast<std::uint32_t>(model.arch.input_dim));
  w.write_pod(static_cast<std::uint32_t>(model.arch.output_dim));
  w.write_pod(static_cast<std::uint32_t>(model.arch.hidden.size()));
  for (int h : model.arch.hidden) w.write_pod(static_cast<std::uint32_t>(h));
  for (std::size_t l = 0; l < model.arch.layers(); ++l) {
    w.write(model.weights[l].data(), model.weights[l].size() * sizeof(float));
    w.write(model.biases[l].data(), model.biases[l].size() * sizeof(float));
  }
  out.write(reinterpret_cast<const char*>(&w.crc), sizeof(w.crc));
  if (!out) throw ModelIoError(ModelIoError::Kind::Io, path.string() + ": write failed");
}

Mlp<float> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelIoError(ModelIoError::Kind::Io, path.string() + ": cannot open");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (static_cast<std::size_t>(in.gcount()) != sizeof(magic) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ModelIoError(ModelIoError::Kind::BadMagic, path.string() + ": bad magic header");
  CrcReader r{in};
  const auto version = r.read_pod<std::uint32_t>();
  if (version != kVersion)
    throw ModelIoError(ModelIoError::Kind::BadVersion,
                       path.string() + ": unsupported container version " + std::to_string(version));
  Mlp<float> model;
  model.init_seed = r.read_pod<std::uint64_t>();
  model.arch.input_dim = static_cast<int>(r.read_pod<std::uint32_t>());
  model.arch.output_dim = static_cast<int>(r.read_pod<std::uint32_t>());
  const auto n_hidden = r.read_pod<std::uint32_t>();
  if (n_hidden > 64)
    throw ModelIoError(ModelIoError::Kind::BadData, path.string() + ": implausible layer count");
  model.arch.hidden.resize(n_hidden);
  for (auto& h : model.arch.hidden) h = static_cast<int>(r.read_pod<std::uint32_t>());
  model.arch.validate();
  const std::size_t layers = model.arch.layers();
  model.weights.resize(layers);
  model.biases.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t din = static_cast<std::size_t>(model.arch.dim(l));
    const std::size_t dout = static_cast<std::size_t>(model.arch.dim(l + 1));
    model.weights[l].resize(din * dout);
    model.biases[l].resize(dout);
    r.read(model.weights[l].data(), model.weights[l].size() * sizeof(float));
    r.read(model.biases[l].data(), model.biases[l].size() * sizeof(float));
  }
  std::uint32_t stored_crc;
  in.read(reinterpret_cast<char*>(&stored_crc), sizeof(stored_crc));
  if (static_cast<std::size_t>(in.gcount()) != sizeof(stored_crc))
    throw ModelIoError(ModelIoError::Kind::Truncated, path.string() + ": model file is truncated");
  if (stored_crc != r.crc)
    throw ModelIoError(ModelIoError::Kind::BadChecksum, path.string() + ": checksum mismatch");
  return model;
}

}  // namespace diffdist
