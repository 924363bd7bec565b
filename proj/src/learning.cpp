#include "dyckin/learning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dyckin {

std::vector<double> compute_returns(const EpisodeTrace& trace, const RewardScheme& scheme) {
  std::size_t T = trace.steps.size();
  std::vector<double> out(T);
  if (T == 0) return out;
  double r = static_cast<double>(trace.final_reward);
  switch (scheme.kind) {
    case RewardScheme::Kind::WholeEpisode:
      std::fill(out.begin(), out.end(), r);
      break;
    case RewardScheme::Kind::TemporalDifference: {
      if (!(scheme.gamma > 0.0 && scheme.gamma <= 1.0))
        throw std::invalid_argument("compute_returns: gamma must be in (0, 1]");
      double w = r;
      for (std::size_t t = T; t-- > 0;) {
        out[t] = w;
        w *= scheme.gamma;
      }
      break;
    }
  }
  return out;
}

int select_action(const Mlp& policy, const Vec& features, const ExplorationPolicy& exploration,
                  Rng& rng) {
  int n = policy.output_dim();
  switch (exploration.kind) {
    case ExplorationPolicy::Kind::EpsilonRandom:
      if (!(exploration.epsilon >= 0.0 && exploration.epsilon <= 1.0))
        throw std::invalid_argument("select_action: epsilon must be in [0, 1]");
      if (uniform01(rng) < exploration.epsilon) return uniform_int(rng, n);
      [[fallthrough]];
    case ExplorationPolicy::Kind::Deterministic: {
      Vec p = policy.policy_distribution(features);
      return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    }
    case ExplorationPolicy::Kind::SampleFromPolicy: {
      Vec p = policy.policy_distribution(features);
      double u = uniform01(rng);
      double acc = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) return static_cast<int>(i);
      }
      return n - 1;
    }
  }
  throw std::invalid_argument("select_action: bad exploration kind");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (buf_.size() == capacity_) buf_.pop_front();
  buf_.push_back(std::move(t));
}

void ReplayBuffer::push_episode(const EpisodeTrace& trace, std::span<const double> weights) {
  if (weights.size() != trace.steps.size())
    throw std::invalid_argument("ReplayBuffer::push_episode: weight count mismatch");
  for (std::size_t t = 0; t < trace.steps.size(); ++t)
    push({trace.steps[t].observation, trace.steps[t].action, weights[t]});
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  std::vector<Transition> out;
  if (buf_.empty()) return out;
  out.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i)
    out.push_back(buf_[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(buf_.size())))]);
  return out;
}

CuTrainer::CuTrainer(SgdConfig sgd, bool use_baseline, double baseline_decay)
    : sgd_(sgd), use_baseline_(use_baseline), decay_(baseline_decay) {
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0))
    throw std::invalid_argument("CuTrainer: baseline decay must be in [0, 1)");
}

double CuTrainer::train_batch(Mlp& policy, std::span<const Transition> batch) {
  if (batch.empty()) return 0.0;
  double norm_sum = 0.0;
  for (const auto& t : batch) {
    double w = use_baseline_ ? t.weight - baseline_ : t.weight;
    norm_sum += policy.reinforce_step(t.observation, t.action, w, sgd_);
    if (use_baseline_) baseline_ = decay_ * baseline_ + (1.0 - decay_) * t.weight;
  }
  return norm_sum / static_cast<double>(batch.size());
}

}  // namespace dyckin
