#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dyckin/common.hpp"
#include "dyckin/curriculum.hpp"
#include "dyckin/dyck.hpp"
#include "dyckin/learning.hpp"
#include "dyckin/vecnn.hpp"

namespace dyckin {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class RunMode { RandomInit, Pretrained };

// Everything a run needs. One master seed drives deterministic sub-seeds for
// the codebook, both networks, pretraining, noise, and the episode stream.
struct RunConfig {
  RunMode mode = RunMode::RandomInit;

  DyckConfig dyck;
  int codebook_dim = 8;

  struct Ladder {
    int start_length = 10;
    // When unset: BracketMatch is included for random-init runs only.
    std::optional<bool> bracket_match_first;
    int window = 100;
    double revisit_probability = 0.1;
    double unlock_threshold = 0.95;
  } ladder;

  struct Model {
    int pu_hidden = 32;
    int cu_hidden = 64;
  } model;

  RewardScheme reward;
  ExplorationPolicy exploration{ExplorationPolicy::Kind::Deterministic, 0.05};

  struct Sgd {
    double cu_learning_rate = 0.01;
    double pu_learning_rate = 0.05;
    std::optional<double> clip_norm = 5.0;
  } sgd;

  struct Replay {
    int capacity = 50000;
    int batch_size = 64;
  } replay;

  struct Pretrain {
    std::vector<int> lengths{2, 4, 6, 8, 10};
    int episodes_per_length = 200;
    double learning_rate = 0.02;
    double agreement_target = 0.90;
    int epoch_cap = 50;
    int eval_chunk = 2000;
    double holdout_fraction = 0.10;
    double noise_sigma = 0.05;
  } pretrain;

  std::uint64_t seed = 1;
  long long episode_budget = 150000;
  std::string out_dir = "out";

  bool bracket_match_enabled() const {
    return ladder.bracket_match_first.value_or(mode == RunMode::RandomInit);
  }
  SgdConfig cu_sgd() const { return {sgd.cu_learning_rate, sgd.clip_norm}; }
  SgdConfig pu_sgd() const { return {sgd.pu_learning_rate, sgd.clip_norm}; }
};

// JSON object with sorted keys; parse -> serialize is canonical and stable.
std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text);  // throws ConfigError naming the field
RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& cfg, const std::filesystem::path& path);

// Checkpoint directory: cu.bin + pu.bin (binary nets) + config.json snapshot.
void save_checkpoint(const std::filesystem::path& dir, const RunConfig& cfg, const Mlp& cu,
                     const Mlp& pu);
struct Checkpoint {
  RunConfig config;
  Mlp cu;
  Mlp pu;
};
Checkpoint load_checkpoint(const std::filesystem::path& dir);

// One line of metrics.jsonl. wall_ms is the only field excluded from
// determinism comparisons.
struct EpisodeRecord {
  long long episode = 0;
  std::string level;
  int length = 0;
  bool success = false;
  int steps = 0;
  double grad_norm = 0.0;
  bool unlock = false;
  int unlocked_index = 0;
  double window_rate = 0.0;
  double wall_ms = 0.0;
};

struct UnlockEvent {
  std::string level;  // the level whose window reached the threshold
  long long episode = 0;
};

struct TrainSummary {
  long long episodes = 0;
  std::vector<UnlockEvent> unlocks;
  std::map<std::string, double> final_window_rates;
  std::optional<PretrainResult> pretrain;
  std::filesystem::path out_dir;
};

struct TrainOptions {
  // Called after every episode; return false to stop the run early.
  std::function<bool(const EpisodeRecord&)> on_episode;
  bool quiet = true;  // suppress progress lines on stderr
};

// Full training run: optional pretraining phase, then the curriculum loop.
// Writes config.json, metrics.jsonl, per-unlock checkpoints, and a final
// checkpoint under cfg.out_dir.
TrainSummary run_train(const RunConfig& cfg, const TrainOptions& opts = {});

struct EvalOptions {
  // Exactly one source: a checkpoint directory, or oracle=true (scripted
  // policy with the exact processing unit, configured by `config`).
  // Before the scored episodes, one unscored scripted warm-up episode runs so
  // the machine starts in its working regime (a trained policy never operates
  // from the all-zero boot state; see PolicyRig::warm_up).
  std::filesystem::path checkpoint;
  bool oracle = false;
  RunConfig config;  // used when oracle=true; overridden by the checkpoint's snapshot otherwise
  std::vector<int> lengths{10, 100, 1000};
  int episodes_per_length = 100;
  bool deterministic = true;
  std::uint64_t seed = 1;
};

struct EvalRow {
  int length = 0;
  int episodes = 0;
  int successes = 0;
  double rate = 0.0;
};

std::vector<EvalRow> run_eval(const EvalOptions& opts);

struct TraceOptions {
  std::filesystem::path checkpoint;
  bool oracle = false;
  RunConfig config;
  int length = 10;
  std::uint64_t seed = 1;
};

// Runs one episode (after the same unscored warm-up episode run_eval uses)
// and streams step-level lines: step index, action name, decoded node
// summaries, memory size, submission outcome; then a footer with the episode
// record. Returns the final reward.
int run_trace(const TraceOptions& opts, std::ostream& os);

// Named sub-seed streams off the master seed.
namespace seed_stream {
inline constexpr std::uint64_t kCodebook = 1;
inline constexpr std::uint64_t kPuInit = 2;
inline constexpr std::uint64_t kCuInit = 3;
inline constexpr std::uint64_t kPretrainTraces = 4;
inline constexpr std::uint64_t kPretrainShuffle = 5;
inline constexpr std::uint64_t kNoise = 6;
inline constexpr std::uint64_t kEpisodes = 7;
inline constexpr std::uint64_t kEval = 8;
}  // namespace seed_stream

}  // namespace dyckin
