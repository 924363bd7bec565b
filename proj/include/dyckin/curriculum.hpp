#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyckin/common.hpp"
#include "dyckin/incore.hpp"
#include "dyckin/vecnn.hpp"

namespace dyckin {

// Difficulty ladder entry. BracketMatch is a warm-up task (one opener, target
// = matching closer then terminator) where the scripted oracle drives the
// actions so only the processing unit learns.
struct Level {
  enum class Kind { BracketMatch, DyckCompletion };
  Kind kind = Kind::DyckCompletion;
  int length = 0;  // DyckCompletion only

  static Level bracket_match() { return {Kind::BracketMatch, 0}; }
  static Level dyck(int length) { return {Kind::DyckCompletion, length}; }

  std::string name() const;
  bool operator==(const Level&) const = default;
};

// Lengths start_length, start_length + 2, ... up to 10, then 100, then 1000;
// optionally preceded by BracketMatch.
std::vector<Level> default_ladder(int start_length, bool include_bracket_match);

// Tracks per-level success windows and the unlocked frontier. The frontier
// advances when its own window is full and the success rate reaches the
// threshold; revisited lower levels never advance it.
class CurriculumState {
 public:
  CurriculumState(std::vector<Level> ladder, int window = 100, double revisit_probability = 0.1,
                  double unlock_threshold = 0.95);

  // The frontier level, except with revisit_probability a uniformly random
  // already-unlocked lower level.
  const Level& next_level(Rng& rng);

  // Records one episode result; returns whether the frontier advanced.
  bool record_result(const Level& level, bool success);

  std::size_t unlocked_index() const { return unlocked_; }
  const std::vector<Level>& ladder() const { return ladder_; }
  std::size_t level_index(const Level& level) const;
  double window_rate(std::size_t level_index) const;
  std::size_t window_fill(std::size_t level_index) const;
  int window_size() const { return window_; }

 private:
  std::vector<Level> ladder_;
  int window_;
  double revisit_p_;
  double threshold_;
  std::size_t unlocked_ = 0;
  std::vector<std::deque<char>> windows_;
};

struct OracleUndefinedError : std::runtime_error {
  explicit OracleUndefinedError(const std::string& what) : std::runtime_error(what) {}
};

// Scripted expert. Reconstructs its phase from the machine state alone (the
// TaskNew nonce, the last action, decoded node contents, and the active deque
// size): reset the memory with the task nonce, push each opener's code while
// reading, then on the terminator emit closers by peeking and popping the
// right end, and finally submit the terminator itself. Throws
// OracleUndefinedError when the state could not have arisen from this script.
int oracle_action(const INState& state);

// Convenience selector for run_episode.
inline int oracle_selector(const INState& state, const Vec&) { return oracle_action(state); }

struct TraceExample {
  Vec observation;
  int action = 0;
  int episode = 0;
  int step = 0;
};

// Supervision data: oracle-driven episodes through the real machine with the
// exact processing unit. Every episode must succeed; anything else reports a
// plumbing defect by throwing std::logic_error.
std::vector<TraceExample> generate_traces(const std::vector<int>& lengths, int count_per_length,
                                          const DyckConfig& cfg, const SymbolCodebook& codebook,
                                          Rng& rng);

struct PretrainConfig {
  SgdConfig sgd{0.02, 5.0};
  double agreement_target = 0.90;  // stop once held-out greedy agreement reaches this
  int epoch_cap = 50;
  double holdout_fraction = 0.10;
  int eval_chunk = 2000;  // agreement is re-checked every this many updates
};

struct PretrainResult {
  std::size_t train_examples = 0;
  std::size_t holdout_examples = 0;
  double holdout_agreement = 0.0;
  int epochs_run = 0;
  long long updates_run = 0;
  bool reached_target = false;
};

// Behavior cloning: cross-entropy SGD on (observation, action) pairs with a
// held-out split, stopping early at the agreement target.
PretrainResult pretrain_cu(Mlp& policy, const std::vector<TraceExample>& traces,
                           const PretrainConfig& cfg, Rng& rng);

// Fraction of holdout examples whose greedy policy action matches the label.
double greedy_agreement(const Mlp& policy, const std::vector<TraceExample>& examples);

}  // namespace dyckin
