// Multilayer perceptron with Adam and per-component binary cross-entropy,
// written directly against the row-major kernels in gemm.hpp.
//
// Hidden activations are ReLU; the output layer is sigmoid paired with BCE
// against one-hot targets (a softmax/cross-entropy mode exists behind
// LossKind for sensitivity checks). Predictions are argmax over the t
// outputs with ties broken toward the lowest class index.
//
// Everything is templated on the scalar so the training path runs in float
// while gradient-oracle tests instantiate the identical code in double.
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffdist/diffgen.hpp"
#include "diffdist/gemm.hpp"
#include "diffdist/rng.hpp"

namespace diffdist {

struct MlpArch {
  int input_dim = 64;
  std::vector<int> hidden;
  int output_dim = 4;

  static MlpArch proposed(int t) { return {64, {128, 1024}, t}; }
  static MlpArch baksi(int t) { return {64, {128, 1024, 1024}, t}; }
  static MlpArch preset(const std::string& name, int t);

  std::size_t layers() const { return hidden.size() + 1; }
  int dim(std::size_t i) const {  // width of activation i (0 = input)
    if (i == 0) return input_dim;
    if (i <= hidden.size()) return hidden[i - 1];
    return output_dim;
  }
  void validate() const;
  friend bool operator==(const MlpArch&, const MlpArch&) = default;
};

enum class LossKind { Bce, SoftmaxXent };

template <class Real>
struct Mlp {
  MlpArch arch;
  std::vector<std::vector<Real>> weights;  // [layer] row-major dim(l) x dim(l+1)
  std::vector<std::vector<Real>> biases;   // [layer] dim(l+1)
  std::uint64_t init_seed = 0;
};

// Fan-in scaled uniform init, U(-sqrt(6/fan_in), +sqrt(6/fan_in)); biases zero.
template <class Real>
Mlp<Real> init_model(const MlpArch& arch, std::uint64_t seed);

// Activations of one forward pass; act[i] is batch x dim(i+1), so act.back()
// holds the output probabilities.
template <class Real>
struct ForwardCache {
  std::vector<std::vector<Real>> act;
};

template <class Real>
void forward_batch(const Mlp<Real>& model, const Real* x, std::size_t batch,
                   ForwardCache<Real>& cache, LossKind loss = LossKind::Bce);

// Mean over batch and components of -[y log p + (1-y) log(1-p)] with
// probability clamping.
template <class Real>
double bce_loss(const Real* p, const Real* y, std::size_t count);

template <class Real>
double softmax_xent_loss(const Real* p, const Real* y, std::size_t batch, std::size_t t);

template <class Real>
struct Gradients {
  std::vector<std::vector<Real>> weights;
  std::vector<std::vector<Real>> biases;
};

template <class Real>
void backward_batch(const Mlp<Real>& model, const Real* x, std::size_t batch,
                    const ForwardCache<Real>& cache, const Real* targets,
                    Gradients<Real>& grads, LossKind loss = LossKind::Bce);

template <class Real>
struct AdamState {
  std::vector<std::vector<Real>> m_w, v_w, m_b, v_b;
  std::uint64_t step = 0;
  Real beta1 = Real(0.9), beta2 = Real(0.999), eps = Real(1e-8);
  // running beta^step factors, advanced multiplicatively for determinism
  double beta1_pow = 1.0, beta2_pow = 1.0;
};

template <class Real>
AdamState<Real> make_adam_state(const Mlp<Real>& model);

template <class Real>
void adam_step(Mlp<Real>& model, const Gradients<Real>& grads, AdamState<Real>& state, double lr);

// Feature matrix bridging DiffDataset records to the network input.
struct FeatureMatrix {
  std::vector<float> x;          // n x dim row-major
  std::vector<std::uint16_t> y;  // n labels
  std::size_t n = 0;
  std::size_t dim = 64;
  std::size_t t = 0;
};

FeatureMatrix featurize(const DiffDataset& dataset, std::span<const std::uint32_t> indices);

struct TrainConfig {
  double learning_rate = 0.001;
  int epochs = 25;
  int batch_size = 100;
  double val_fraction = 0.3;
  std::uint64_t seed = 1;  // drives init and shuffles via substreams
  LossKind loss = LossKind::Bce;

  void validate() const;
};

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> train_acc;
  std::vector<double> val_acc;
  double final_val_acc = 0.0;
  bool diverged = false;
  double wall_ms = 0.0;
};

// Runs epochs x (train_size / batch_size) Adam steps over seeded shuffled
// mini-batches, recording per-epoch validation accuracy. A non-finite loss
// aborts the run with report.diverged set; it is not an exception.
TrainReport train_mlp(Mlp<float>& model, const FeatureMatrix& train, const FeatureMatrix& val,
                      const TrainConfig& config);

// Fraction of records whose argmax output equals the label.
double evaluate_accuracy(const Mlp<float>& model, const FeatureMatrix& data);

// Versioned binary container (magic, arch metadata, row-major parameters,
// CRC-32). Load failures are reported as distinct ModelIoError kinds.
class ModelIoError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, BadVersion, Truncated, BadChecksum, BadData, Io };
  ModelIoError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

void save_model(const Mlp<float>& model, const std::filesystem::path& path);
Mlp<float> load_model(const std::filesystem::path& path);

// ---- template definitions -------------------------------------------------

template <class Real>
Mlp<Real> init_model(const MlpArch& arch, std::uint64_t seed) {
  arch.validate();
  Mlp<Real> m;
  m.arch = arch;
  m.init_seed = seed;
  const std::size_t layers = arch.layers();
  m.weights.resize(layers);
  m.biases.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t fan_in = static_cast<std::size_t>(arch.dim(l));
    const std::size_t fan_out = static_cast<std::size_t>(arch.dim(l + 1));
    SplitMix64 rng(derive_seed(seed, 0x696E6974ULL, l));
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    m.weights[l].resize(fan_in * fan_out);
    for (auto& w : m.weights[l])
      w = static_cast<Real>((2.0 * rng.next_unit() - 1.0) * limit);
    m.biases[l].assign(fan_out, Real(0));
  }
  return m;
}

template <class Real>
void forward_batch(const Mlp<Real>& model, const Real* x, std::size_t batch,
                   ForwardCache<Real>& cache, LossKind loss) {
  const std::size_t layers = model.arch.layers();
  cache.act.resize(layers);
  const Real* input = x;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t din = static_cast<std::size_t>(model.arch.dim(l));
    const std::size_t dout = static_cast<std::size_t>(model.arch.dim(l + 1));
    auto& out = cache.act[l];
    out.assign(batch * dout, Real(0));
    // bias then accumulate the product
    for (std::size_t i = 0; i < batch; ++i)
      for (std::size_t j = 0; j < dout; ++j) out[i * dout + j] = model.biases[l][j];
    detail::gemm(input, model.weights[l].data(), out.data(), batch, din, dout);
    if (l + 1 < layers) {
      for (auto& v : out) v = v > Real(0) ? v : Real(0);  // ReLU
    } else if (loss == LossKind::Bce) {
      for (auto& v : out) v = Real(1) / (Real(1) + std::exp(-v));  // sigmoid
    } else {
      for (std::size_t i = 0; i < batch; ++i) {  // softmax, row-stabilized
        Real* row = out.data() + i * dout;
        Real mx = row[0];
        for (std::size_t j = 1; j < dout; ++j) mx = row[j] > mx ? row[j] : mx;
        double sum = 0.0;
        for (std::size_t j = 0; j < dout; ++j) {
          row[j] = std::exp(row[j] - mx);
          sum += static_cast<double>(row[j]);
        }
        for (std::size_t j = 0; j < dout; ++j) row[j] = static_cast<Real>(row[j] / sum);
      }
    }
    input = out.data();
  }
}

template <class Real>
double bce_loss(const Real* p, const Real* y, std::size_t count) {
  constexpr double kEps = sizeof(Real) == 4 ? 1e-7 : 1e-12;
  double sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    double pi = static_cast<double>(p[i]);
    if (pi < kEps) pi = kEps;
    if (pi > 1.0 - kEps) pi = 1.0 - kEps;
    const double yi = static_cast<double>(y[i]);
    sum -= yi * std::log(pi) + (1.0 - yi) * std::log1p(-pi);
  }
  return sum / static_cast<double>(count);
}

template <class Real>
double softmax_xent_loss(const Real* p, const Real* y, std::size_t batch, std::size_t t) {
  constexpr double kEps = sizeof(Real) == 4 ? 1e-7 : 1e-12;
  double sum = 0.0;
  for (std::size_t i = 0; i < batch * t; ++i) {
    if (y[i] == Real(0)) continue;
    double pi = static_cast<double>(p[i]);
    if (pi < kEps) pi = kEps;
    sum -= static_cast<double>(y[i]) * std::log(pi);
  }
  return sum / static_cast<double>(batch);
}

template <class Real>
void backward_batch(const Mlp<Real>& model, const Real* x, std::size_t batch,
                    const ForwardCache<Real>& cache, const Real* targets,
                    Gradients<Real>& grads, LossKind loss) {
  const std::size_t layers = model.arch.layers();
  grads.weights.resize(layers);
  grads.biases.resize(layers);

  const std::size_t t = static_cast<std::size_t>(model.arch.output_dim);
  // dL/dz at the output; both losses reduce to (p - y) up to the mean scale.
  std::vector<Real> delta(batch * t);
  {
    const Real* p = cache.act.back().data();
    const Real scale = loss == LossKind::Bce
                           ? Real(1) / static_cast<Real>(batch * t)
                           : Real(1) / static_cast<Real>(batch);
    for (std::size_t i = 0; i < batch * t; ++i) delta[i] = (p[i] - targets[i]) * scale;
  }

  std::vector<Real> scratch;
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t din = static_cast<std::size_t>(model.arch.dim(l));
    const std::size_t dout = static_cast<std::size_t>(model.arch.dim(l + 1));
    const Real* below = l == 0 ? x : cache.act[l - 1].data();

    auto& dw = grads.weights[l];
    auto& db = grads.biases[l];
    dw.assign(din * dout, Real(0));
    db.assign(dout, Real(0));

    // dW = below^T * delta
    scratch.resize(batch * din);
    detail::transpose(below, scratch.data(), batch, din);
    detail::gemm(scratch.data(), delta.data(), dw.data(), din, batch, dout);
    for (std::size_t i = 0; i < batch; ++i)
      for (std::size_t j = 0; j < dout; ++j) db[j] += delta[i * dout + j];

    if (l == 0) break;
    // delta_prev = (delta * W^T) masked by ReLU activity
    std::vector<Real> wt(din * dout);
    detail::transpose(model.weights[l].data(), wt.data(), din, dout);
    std::vector<Real> prev(batch * din, Real(0));
    detail::gemm(delta.data(), wt.data(), prev.data(), batch, dout, din);
    const Real* act = cache.act[l - 1].data();
    for (std::size_t i = 0; i < batch * din; ++i)
      if (act[i] <= Real(0)) prev[i] = Real(0);
    delta = std::move(prev);
  }
}

template <class Real>
AdamState<Real> make_adam_state(const Mlp<Real>& model) {
  AdamState<Real> s;
  const std::size_t layers = model.arch.layers();
  s.m_w.resize(layers);
  s.v_w.resize(layers);
  s.m_b.resize(layers);
  s.v_b.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    s.m_w[l].assign(model.weights[l].size(), Real(0));
    s.v_w[l].assign(model.weights[l].size(), Real(0));
    s.m_b[l].assign(model.biases[l].size(), Real(0));
    s.v_b[l].assign(model.biases[l].size(), Real(0));
  }
  return s;
}

template <class Real>
void adam_step(Mlp<Real>& model, const Gradients<Real>& grads, AdamState<Real>& state,
               double lr) {
  state.step += 1;
  state.beta1_pow *= static_cast<double>(state.beta1);
  state.beta2_pow *= static_cast<double>(state.beta2);
  const double corr1 = 1.0 - state.beta1_pow;
  const double corr2 = 1.0 - state.beta2_pow;
  const auto update = [&](std::vector<Real>& param, const std::vector<Real>& g,
                          std::vector<Real>& m, std::vector<Real>& v) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      m[i] = state.beta1 * m[i] + (Real(1) - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (Real(1) - state.beta2) * g[i] * g[i];
      const double mhat = static_cast<double>(m[i]) / corr1;
      const double vhat = static_cast<double>(v[i]) / corr2;
      param[i] -= static_cast<Real>(lr * mhat / (std::sqrt(vhat) + static_cast<double>(state.eps)));
    }
  };
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    update(model.weights[l], grads.weights[l], state.m_w[l], state.v_w[l]);
    update(model.biases[l], grads.biases[l], state.m_b[l], state.v_b[l]);
  }
}

}  // namespace diffdist
