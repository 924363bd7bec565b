#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dyckin/curriculum.hpp"
#include "dyckin/dyck.hpp"
#include "dyckin/harness.hpp"

namespace {

using dyckin::RunConfig;

RunConfig load_with_overrides(const std::string& config_path,
                              const std::optional<std::uint64_t>& seed,
                              const std::optional<std::string>& out,
                              const std::optional<long long>& episodes) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : dyckin::load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (out) cfg.out_dir = *out;
  if (episodes) cfg.episode_budget = *episodes;
  return cfg;
}

int cmd_train(const std::string& config_path, const std::optional<std::uint64_t>& seed,
              const std::optional<std::string>& out, const std::optional<long long>& episodes,
              bool progress) {
  RunConfig cfg = load_with_overrides(config_path, seed, out, episodes);
  dyckin::TrainOptions opts;
  opts.quiet = !progress;
  dyckin::TrainSummary s = dyckin::run_train(cfg, opts);
  nlohmann::json j;
  j["episodes"] = s.episodes;
  j["out_dir"] = s.out_dir.string();
  nlohmann::json unlocks = nlohmann::json::array();
  for (const auto& u : s.unlocks) unlocks.push_back({{"level", u.level}, {"episode", u.episode}});
  j["unlocks"] = unlocks;
  j["final_window_rates"] = s.final_window_rates;
  if (s.pretrain) {
    j["pretrain"] = {{"holdout_agreement", s.pretrain->holdout_agreement},
                     {"updates", s.pretrain->updates_run},
                     {"reached_target", s.pretrain->reached_target}};
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, bool oracle, const std::string& config_path,
             const std::vector<int>& lengths, int episodes, bool sample, std::uint64_t seed) {
  dyckin::EvalOptions opts;
  opts.checkpoint = checkpoint;
  opts.oracle = oracle;
  if (oracle && !config_path.empty()) opts.config = dyckin::load_config(config_path);
  if (!lengths.empty()) opts.lengths = lengths;
  opts.episodes_per_length = episodes;
  opts.deterministic = !sample;
  opts.seed = seed;
  auto rows = dyckin::run_eval(opts);
  for (const auto& r : rows)
    std::cout << "length " << r.length << ": " << r.successes << "/" << r.episodes
              << " solved, rate " << r.rate << "\n";
  return 0;
}

int cmd_trace(const std::string& checkpoint, bool oracle, const std::string& config_path,
              int length, std::uint64_t seed) {
  dyckin::TraceOptions opts;
  opts.checkpoint = checkpoint;
  opts.oracle = oracle;
  if (oracle && !config_path.empty()) opts.config = dyckin::load_config(config_path);
  opts.length = length;
  opts.seed = seed;
  dyckin::run_trace(opts, std::cout);
  return 0;
}

int cmd_gen_dyck(int num_types, double close_probability, int length, int count,
                 std::uint64_t seed, bool pairs) {
  dyckin::DyckConfig cfg{num_types, close_probability};
  dyckin::Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    auto prefix = dyckin::generate_prefix(cfg, length, rng);
    auto completion = dyckin::required_completion(prefix);
    if (pairs)
      std::cout << dyckin::to_text(prefix) << "\t" << dyckin::to_text(completion) << "\n";
    else
      std::cout << dyckin::to_text(prefix) << dyckin::to_text(completion) << "\n";
  }
  return 0;
}

int cmd_pretrain(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                 const std::optional<std::string>& out) {
  RunConfig cfg = load_with_overrides(config_path, seed, out, std::nullopt);
  namespace ss = dyckin::seed_stream;
  dyckin::SymbolCodebook codebook(cfg.dyck.num_bracket_types, cfg.codebook_dim,
                                  dyckin::derive_seed(cfg.seed, ss::kCodebook));
  int obs_dim = dyckin::kNumNodes * cfg.codebook_dim + dyckin::num_actions() + 4;
  dyckin::Mlp cu({obs_dim, cfg.model.cu_hidden, dyckin::num_actions()}, dyckin::HeadKind::Policy,
                 dyckin::derive_seed(cfg.seed, ss::kCuInit));
  dyckin::Mlp pu({cfg.codebook_dim, cfg.model.pu_hidden, cfg.codebook_dim},
                 dyckin::HeadKind::Regression, dyckin::derive_seed(cfg.seed, ss::kPuInit));
  dyckin::Rng trace_rng(dyckin::derive_seed(cfg.seed, ss::kPretrainTraces));
  auto traces = dyckin::generate_traces(cfg.pretrain.lengths, cfg.pretrain.episodes_per_length,
                                        cfg.dyck, codebook, trace_rng);
  dyckin::PretrainConfig pc;
  pc.sgd = dyckin::SgdConfig{cfg.pretrain.learning_rate, cfg.sgd.clip_norm};
  pc.agreement_target = cfg.pretrain.agreement_target;
  pc.epoch_cap = cfg.pretrain.epoch_cap;
  pc.eval_chunk = cfg.pretrain.eval_chunk;
  pc.holdout_fraction = cfg.pretrain.holdout_fraction;
  dyckin::Rng shuffle_rng(dyckin::derive_seed(cfg.seed, ss::kPretrainShuffle));
  auto res = dyckin::pretrain_cu(cu, traces, pc, shuffle_rng);
  std::filesystem::path dir = std::filesystem::path(cfg.out_dir) / "ckpt_pretrained";
  dyckin::save_checkpoint(dir, cfg, cu, pu);
  nlohmann::json j;
  j["examples"] = res.train_examples + res.holdout_examples;
  j["holdout_agreement"] = res.holdout_agreement;
  j["epochs"] = res.epochs_run;
  j["updates"] = res.updates_run;
  j["reached_target"] = res.reached_target;
  j["checkpoint"] = dir.string();
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interaction-network agent for bracket-completion tasks"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  std::optional<long long> episodes_override;
  bool progress = false;

  auto* train = app.add_subcommand("train", "Run the curriculum training loop");
  train->add_option("--config", config_path, "Run config JSON (defaults apply when omitted)");
  train->add_option("--seed", seed_override, "Override the master seed");
  train->add_option("--out", out_override, "Override the output directory");
  train->add_option("--episodes", episodes_override, "Override the episode budget");
  train->add_flag("--progress", progress, "Print progress lines to stderr");

  std::string checkpoint;
  bool oracle = false;
  std::vector<int> lengths;
  int eval_episodes = 100;
  bool sample = false;
  std::uint64_t run_seed = 1;

  auto* eval = app.add_subcommand("eval", "Measure solved rates from a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint directory");
  eval->add_flag("--oracle", oracle, "Use the scripted policy with the exact processing unit");
  eval->add_option("--config", config_path, "Config for --oracle runs");
  eval->add_option("--lengths", lengths, "Prefix lengths to evaluate")->delimiter(',');
  eval->add_option("--episodes", eval_episodes, "Episodes per length");
  eval->add_flag("--sample", sample, "Sample from the policy instead of greedy actions");
  eval->add_option("--seed", run_seed, "Evaluation seed");

  int trace_length = 10;
  auto* trace = app.add_subcommand("trace", "Print one episode step by step");
  trace->add_option("--checkpoint", checkpoint, "Checkpoint directory");
  trace->add_flag("--oracle", oracle, "Use the scripted policy with the exact processing unit");
  trace->add_option("--config", config_path, "Config for --oracle runs");
  trace->add_option("--length", trace_length, "Prefix length");
  trace->add_option("--seed", run_seed, "Episode seed");

  int gen_types = 2;
  double gen_close = 0.5;
  int gen_length = 10;
  int gen_count = 10;
  std::uint64_t gen_seed = 1;
  bool gen_pairs = false;
  auto* gen = app.add_subcommand("gen-dyck", "Sample task words from the generator");
  gen->add_option("--n", gen_types, "Number of bracket types");
  gen->add_option("--close-probability", gen_close, "Chance of closing when possible");
  gen->add_option("--length", gen_length, "Prefix length");
  gen->add_option("--count", gen_count, "Number of samples");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_flag("--pairs", gen_pairs, "Print prefix and completion tab-separated");

  auto* pretrain = app.add_subcommand("pretrain", "Behavior-clone the control unit only");
  pretrain->add_option("--config", config_path, "Run config JSON");
  pretrain->add_option("--seed", seed_override, "Override the master seed");
  pretrain->add_option("--out", out_override, "Override the output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed())
      return cmd_train(config_path, seed_override, out_override, episodes_override, progress);
    if (eval->parsed())
      return cmd_eval(checkpoint, oracle, config_path, lengths, eval_episodes, sample, run_seed);
    if (trace->parsed()) return cmd_trace(checkpoint, oracle, config_path, trace_length, run_seed);
    if (gen->parsed())
      return cmd_gen_dyck(gen_types, gen_close, gen_length, gen_count, gen_seed, gen_pairs);
    if (pretrain->parsed()) return cmd_pretrain(config_path, seed_override, out_override);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
