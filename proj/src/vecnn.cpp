#include "dyckin/vecnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace dyckin {

namespace {

void put_bytes(std::ostream& os, std::uint64_t v, int n) {
  char buf[8];
  for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, n);
}

std::uint64_t get_bytes(std::istream& is, int n) {
  char buf[8] = {};
  is.read(buf, n);
  if (!is) throw std::runtime_error("checkpoint: truncated stream");
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  put_bytes(os, bits, 8);
}

double get_f64(std::istream& is) {
  std::uint64_t bits = get_bytes(is, 8);
  double x;
  std::memcpy(&x, &bits, sizeof x);
  return x;
}

constexpr char kMagic[8] = {'D', 'Y', 'N', 'N', 'C', 'K', 'P', '1'};

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes, HeadKind head, std::uint64_t seed)
    : sizes_(std::move(layer_sizes)), head_(head), seed_(seed) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
  for (int s : sizes_)
    if (s < 1) throw std::invalid_argument("Mlp: layer sizes must be positive");

  Rng rng(seed);
  layers_.resize(sizes_.size() - 1);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Layer& layer = layers_[l];
    layer.in = sizes_[l];
    layer.out = sizes_[l + 1];
    double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
    layer.b.resize(static_cast<std::size_t>(layer.out));
    for (auto& x : layer.w) x = uniform_range(rng, -bound, bound);
    for (auto& x : layer.b) x = uniform_range(rng, -bound, bound);
  }
}

void Mlp::check_input(const Vec& x) const {
  if (layers_.empty()) throw std::logic_error("Mlp: uninitialized");
  if (static_cast<int>(x.size()) != sizes_.front())
    throw std::invalid_argument("Mlp: input dimension mismatch");
  if (!all_finite(x)) throw std::invalid_argument("Mlp: non-finite input");
}

void Mlp::forward_all(const Vec& x, std::vector<Vec>& acts) const {
  acts.assign(1, x);
  acts.reserve(layers_.size() + 1);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const Vec& a = acts.back();
    Vec z(static_cast<std::size_t>(layer.out));
    for (int o = 0; o < layer.out; ++o) {
      double s = layer.b[static_cast<std::size_t>(o)];
      const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) s += row[i] * a[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(o)] = s;
    }
    if (l + 1 < layers_.size())
      for (auto& v : z) v = std::tanh(v);
    acts.push_back(std::move(z));
  }
}

Vec Mlp::forward(const Vec& x) const {
  check_input(x);
  std::vector<Vec> acts;
  forward_all(x, acts);
  return std::move(acts.back());
}

Vec Mlp::policy_distribution(const Vec& features) const {
  if (head_ != HeadKind::Policy)
    throw std::logic_error("policy_distribution: not a policy net");
  Vec logits = forward(features);
  double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (auto& v : logits) {
    v = std::exp(v - m);
    sum += v;
  }
  for (auto& v : logits) v /= sum;
  return logits;
}

double Mlp::gradient_step(const std::vector<Vec>& acts, Vec output_grad, double step_scale,
                          const SgdConfig& cfg) {
  // delta for the current layer; start at the output (identity activation).
  std::vector<std::vector<double>> grad_w(layers_.size());
  std::vector<std::vector<double>> grad_b(layers_.size());
  Vec delta = std::move(output_grad);
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& layer = layers_[li];
    const Vec& a_prev = acts[li];
    grad_w[li].resize(layer.w.size());
    grad_b[li].assign(delta.begin(), delta.end());
    for (int o = 0; o < layer.out; ++o) {
      double d = delta[static_cast<std::size_t>(o)];
      double* gw = grad_w[li].data() + static_cast<std::size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) gw[i] = d * a_prev[static_cast<std::size_t>(i)];
    }
    if (li > 0) {
      Vec prev_delta(static_cast<std::size_t>(layer.in), 0.0);
      for (int o = 0; o < layer.out; ++o) {
        double d = delta[static_cast<std::size_t>(o)];
        const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
        for (int i = 0; i < layer.in; ++i) prev_delta[static_cast<std::size_t>(i)] += d * row[i];
      }
      // acts[li] is the tanh output of the previous layer.
      for (int i = 0; i < layer.in; ++i) {
        double a = a_prev[static_cast<std::size_t>(i)];
        prev_delta[static_cast<std::size_t>(i)] *= (1.0 - a * a);
      }
      delta = std::move(prev_delta);
    }
  }

  double norm_sq = 0.0;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    for (double g : grad_w[li]) norm_sq += g * g;
    for (double g : grad_b[li]) norm_sq += g * g;
  }
  double norm = std::sqrt(norm_sq);

  double scale = step_scale;
  if (cfg.clip_norm && norm > *cfg.clip_norm) scale *= *cfg.clip_norm / norm;

  for (std::size_t li = 0; li < layers_.size(); ++li) {
    Layer& layer = layers_[li];
    for (std::size_t k = 0; k < layer.w.size(); ++k) layer.w[k] += scale * grad_w[li][k];
    for (std::size_t k = 0; k < layer.b.size(); ++k) layer.b[k] += scale * grad_b[li][k];
  }
  return norm;
}

double Mlp::train_mse_step(const Vec& x, const Vec& target, const SgdConfig& cfg) {
  if (head_ != HeadKind::Regression)
    throw std::logic_error("train_mse_step: not a regression net");
  check_input(x);
  if (static_cast<int>(target.size()) != sizes_.back())
    throw std::invalid_argument("train_mse_step: target dimension mismatch");
  if (!all_finite(target)) throw std::invalid_argument("train_mse_step: non-finite target");

  std::vector<Vec> acts;
  forward_all(x, acts);
  const Vec& y = acts.back();
  std::size_t n = y.size();
  double loss = 0.0;
  Vec grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    double e = y[i] - target[i];
    loss += e * e;
    grad[i] = 2.0 * e / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);
  gradient_step(acts, std::move(grad), -cfg.learning_rate, cfg);
  return loss;
}

double Mlp::reinforce_step(const Vec& features, int action, double weight, const SgdConfig& cfg) {
  if (head_ != HeadKind::Policy)
    throw std::logic_error("reinforce_step: not a policy net");
  check_input(features);
  if (action < 0 || action >= sizes_.back())
    throw std::invalid_argument("reinforce_step: action out of range");
  if (!std::isfinite(weight)) throw std::invalid_argument("reinforce_step: non-finite weight");

  std::vector<Vec> acts;
  forward_all(features, acts);
  const Vec& logits = acts.back();
  double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  Vec p(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  // d(weight * log pi[a]) / dlogits = weight * (onehot(a) - pi)
  Vec grad(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] /= sum;
    grad[i] = -weight * p[i];
  }
  grad[static_cast<std::size_t>(action)] += weight;
  return gradient_step(acts, std::move(grad), cfg.learning_rate, cfg);
}

Mlp Mlp::perturbed(double sigma, std::uint64_t seed) const {
  if (sigma < 0.0) throw std::invalid_argument("perturbed: sigma must be non-negative");
  Mlp out = *this;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (auto& layer : out.layers_) {
    for (auto& x : layer.w) x += sigma * gaussian(rng);
    for (auto& x : layer.b) x += sigma * gaussian(rng);
  }
  return out;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.w.size() + layer.b.size();
  return n;
}

std::vector<double> Mlp::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& layer : layers_) {
    flat.insert(flat.end(), layer.w.begin(), layer.w.end());
    flat.insert(flat.end(), layer.b.begin(), layer.b.end());
  }
  return flat;
}

void Mlp::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count())
    throw std::invalid_argument("set_parameters: size mismatch");
  std::size_t k = 0;
  for (auto& layer : layers_) {
    for (auto& x : layer.w) x = flat[k++];
    for (auto& x : layer.b) x = flat[k++];
  }
}

// Checkpoint layout, little-endian throughout:
//   bytes 0..7   magic "DYNNCKP1"
//   u32          head kind (0 = regression, 1 = policy)
//   u32          number of layer sizes L
//   u64          init seed
//   u32 * L      layer sizes
//   u64          parameter count P
//   f64 * P      parameters (per layer: weights row-major, then biases)
void Mlp::save(std::ostream& os) const {
  if (layers_.empty()) throw std::logic_error("Mlp::save: uninitialized");
  os.write(kMagic, sizeof kMagic);
  put_bytes(os, static_cast<std::uint32_t>(head_), 4);
  put_bytes(os, static_cast<std::uint32_t>(sizes_.size()), 4);
  put_bytes(os, seed_, 8);
  for (int s : sizes_) put_bytes(os, static_cast<std::uint32_t>(s), 4);
  put_bytes(os, parameter_count(), 8);
  for (const auto& layer : layers_) {
    for (double x : layer.w) put_f64(os, x);
    for (double x : layer.b) put_f64(os, x);
  }
  if (!os) throw std::runtime_error("Mlp::save: write failed");
}

Mlp Mlp::load(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error("checkpoint: bad magic");
  auto head = static_cast<std::uint32_t>(get_bytes(is, 4));
  if (head > 1) throw std::runtime_error("checkpoint: bad head kind");
  auto num_sizes = static_cast<std::uint32_t>(get_bytes(is, 4));
  if (num_sizes < 2 || num_sizes > 64) throw std::runtime_error("checkpoint: bad layer count");
  std::uint64_t seed = get_bytes(is, 8);
  std::vector<int> sizes(num_sizes);
  for (auto& s : sizes) {
    s = static_cast<int>(get_bytes(is, 4));
    if (s < 1) throw std::runtime_error("checkpoint: bad layer size");
  }
  Mlp out(sizes, static_cast<HeadKind>(head), seed);
  std::uint64_t count = get_bytes(is, 8);
  if (count != out.parameter_count()) throw std::runtime_error("checkpoint: parameter count mismatch");
  std::vector<double> flat(count);
  for (auto& x : flat) x = get_f64(is);
  out.set_parameters(flat);
  return out;
}

}  // namespace dyckin
