#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "dyckin/common.hpp"
#include "dyckin/incore.hpp"
#include "dyckin/vecnn.hpp"

namespace dyckin {

// Per-step credit for the single end-of-episode reward. WholeEpisode gives the
// reward to every step unchanged; TemporalDifference discounts it backwards in
// time so early steps in long episodes receive a vanishing share.
struct RewardScheme {
  enum class Kind { WholeEpisode, TemporalDifference };
  Kind kind = Kind::WholeEpisode;
  double gamma = 0.9;  // TemporalDifference only
};

// weights[t] = reward (WholeEpisode) or gamma^(T-1-t) * reward (TemporalDifference).
std::vector<double> compute_returns(const EpisodeTrace& trace, const RewardScheme& scheme);

struct ExplorationPolicy {
  enum class Kind { Deterministic, EpsilonRandom, SampleFromPolicy };
  Kind kind = Kind::Deterministic;
  double epsilon = 0.0;  // EpsilonRandom only
};

// Deterministic: highest-probability action, ties to the lowest index.
// EpsilonRandom: uniform action with probability epsilon, else deterministic.
// SampleFromPolicy: one draw from the policy distribution.
int select_action(const Mlp& policy, const Vec& features, const ExplorationPolicy& exploration,
                  Rng& rng);

struct Transition {
  Vec observation;
  int action = 0;
  double weight = 0.0;
};

// FIFO ring of transitions with uniform with-replacement sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  void push_episode(const EpisodeTrace& trace, std::span<const double> weights);
  std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

  std::size_t size() const { return buf_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return buf_[i]; }

 private:
  std::size_t capacity_;
  std::deque<Transition> buf_;
};

// REINFORCE updates over sampled transitions. Keeps an exponentially weighted
// moving-average baseline of the raw transition weights and subtracts it
// before each step, so zero-reward episodes still push probability away from
// the actions they took.
class CuTrainer {
 public:
  explicit CuTrainer(SgdConfig sgd, bool use_baseline = true, double baseline_decay = 0.99);

  // One reinforce_step per transition; returns the mean gradient norm.
  double train_batch(Mlp& policy, std::span<const Transition> batch);

  double baseline() const { return baseline_; }
  const SgdConfig& sgd() const { return sgd_; }

 private:
  SgdConfig sgd_;
  bool use_baseline_;
  double decay_;
  double baseline_ = 0.0;
};

}  // namespace dyckin
