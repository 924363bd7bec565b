#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dyckin/common.hpp"

namespace dyckin {

enum class HeadKind : std::uint32_t { Regression = 0, Policy = 1 };

struct SgdConfig {
  double learning_rate = 0.01;
  // Global L2 gradient-norm clip; disabled when absent.
  std::optional<double> clip_norm = 5.0;
};

// Small feedforward net: tanh hidden layers, identity output. The Regression
// head trains with mean-squared error; the Policy head exposes a softmax
// distribution and trains by gradient ascent on weight * log pi(action).
// All gradients are computed by hand and every update is plain SGD.
class Mlp {
 public:
  Mlp() = default;
  // Weights and biases start uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)),
  // drawn deterministically from the seed.
  Mlp(std::vector<int> layer_sizes, HeadKind head, std::uint64_t seed);

  Vec forward(const Vec& x) const;

  // Softmax over the output logits (Policy head).
  Vec policy_distribution(const Vec& features) const;

  // One SGD descent step on mean((forward(x) - target)^2); returns the loss
  // measured before the step.
  double train_mse_step(const Vec& x, const Vec& target, const SgdConfig& cfg);

  // One SGD ascent step on weight * log pi(action | features); returns the
  // global gradient norm measured before clipping.
  double reinforce_step(const Vec& features, int action, double weight, const SgdConfig& cfg);

  // Copy with independent Gaussian noise (std sigma) added to every parameter.
  Mlp perturbed(double sigma, std::uint64_t seed) const;

  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  HeadKind head() const { return head_; }
  std::uint64_t init_seed() const { return seed_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }

  // Little-endian binary checkpoint; see save() in vecnn.cpp for the layout.
  // Round-trips bit-exactly.
  void save(std::ostream& os) const;
  static Mlp load(std::istream& is);

  bool operator==(const Mlp&) const = default;

 private:
  struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> w;  // row-major by output neuron: w[o * in + i]
    std::vector<double> b;
    bool operator==(const Layer&) const = default;
  };

  // Activations for every layer: acts[0] = x, acts.back() = output.
  void forward_all(const Vec& x, std::vector<Vec>& acts) const;
  // Backprop from an output-layer gradient, then apply theta += step_scale * grad.
  // Returns the global gradient norm before clipping.
  double gradient_step(const std::vector<Vec>& acts, Vec output_grad, double step_scale,
                       const SgdConfig& cfg);
  void check_input(const Vec& x) const;

  std::vector<int> sizes_;
  std::vector<Layer> layers_;
  HeadKind head_ = HeadKind::Regression;
  std::uint64_t seed_ = 0;
};

}  // namespace dyckin
