#include "dyckin/harness.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "dyckin/memory.hpp"
#include "dyckin/taskenv.hpp"

namespace dyckin {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void fail_field(const std::string& path, const std::string& why) {
  throw ConfigError("config field '" + path + "': " + why);
}

// Typed, path-aware reads over one JSON object; rejects unknown keys.
class ObjReader {
 public:
  ObjReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail_field(path_.empty() ? "<root>" : path_, "expected an object");
  }

  ~ObjReader() = default;

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.push_back(key);
    return obj_.contains(key);
  }

  const json& raw(const std::string& key) { return obj_.at(key); }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;  // keep default
    const json& v = obj_.at(key);
    try {
      out = v.get<T>();
    } catch (const json::exception&) {
      fail_field(key_path(key), "wrong type");
    }
  }

  void read_optional_double(const std::string& key, std::optional<double>& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (v.is_null()) {
      out = std::nullopt;
      return;
    }
    if (!v.is_number()) fail_field(key_path(key), "expected number or null");
    out = v.get<double>();
  }

  void read_optional_bool(const std::string& key, std::optional<bool>& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (v.is_null()) {
      out = std::nullopt;
      return;
    }
    if (!v.is_boolean()) fail_field(key_path(key), "expected boolean or null");
    out = v.get<bool>();
  }

  void finish() {
    for (const auto& [key, value] : obj_.items()) {
      (void)value;
      bool known = false;
      for (const auto& s : seen_)
        if (s == key) {
          known = true;
          break;
        }
      if (!known) fail_field(key_path(key), "unknown field");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string> seen_;
};

std::string mode_name(RunMode m) {
  return m == RunMode::RandomInit ? "random_init" : "pretrained";
}

RunMode mode_from(const std::string& s) {
  if (s == "random_init") return RunMode::RandomInit;
  if (s == "pretrained") return RunMode::Pretrained;
  fail_field("mode", "must be 'random_init' or 'pretrained'");
}

std::string scheme_name(RewardScheme::Kind k) {
  return k == RewardScheme::Kind::WholeEpisode ? "whole_episode" : "temporal_difference";
}

RewardScheme::Kind scheme_from(const std::string& s) {
  if (s == "whole_episode") return RewardScheme::Kind::WholeEpisode;
  if (s == "temporal_difference") return RewardScheme::Kind::TemporalDifference;
  fail_field("reward.scheme", "must be 'whole_episode' or 'temporal_difference'");
}

std::string exploration_name(ExplorationPolicy::Kind k) {
  switch (k) {
    case ExplorationPolicy::Kind::Deterministic: return "deterministic";
    case ExplorationPolicy::Kind::EpsilonRandom: return "epsilon_random";
    case ExplorationPolicy::Kind::SampleFromPolicy: return "sample_from_policy";
  }
  throw ConfigError("bad exploration kind");
}

ExplorationPolicy::Kind exploration_from(const std::string& s) {
  if (s == "deterministic") return ExplorationPolicy::Kind::Deterministic;
  if (s == "epsilon_random") return ExplorationPolicy::Kind::EpsilonRandom;
  if (s == "sample_from_policy") return ExplorationPolicy::Kind::SampleFromPolicy;
  fail_field("exploration.kind", "must be 'deterministic', 'epsilon_random', or 'sample_from_policy'");
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& path, const std::string& why) {
    if (!ok) fail_field(path, why);
  };
  require(c.dyck.num_bracket_types >= 1 && c.dyck.num_bracket_types <= 26,
          "dyck.num_bracket_types", "must be in [1, 26]");
  require(c.dyck.close_probability >= 0.0 && c.dyck.close_probability <= 1.0,
          "dyck.close_probability", "must be in [0, 1]");
  require(c.codebook_dim >= 1, "codebook_dim", "must be positive");
  require(c.ladder.start_length >= 2, "ladder.start_length", "must be >= 2");
  require(c.ladder.window >= 1, "ladder.window", "must be positive");
  require(c.ladder.revisit_probability >= 0.0 && c.ladder.revisit_probability <= 1.0,
          "ladder.revisit_probability", "must be in [0, 1]");
  require(c.ladder.unlock_threshold > 0.0 && c.ladder.unlock_threshold <= 1.0,
          "ladder.unlock_threshold", "must be in (0, 1]");
  require(c.model.pu_hidden >= 1, "model.pu_hidden", "must be positive");
  require(c.model.cu_hidden >= 1, "model.cu_hidden", "must be positive");
  require(c.reward.gamma > 0.0 && c.reward.gamma <= 1.0, "reward.gamma", "must be in (0, 1]");
  require(c.exploration.epsilon >= 0.0 && c.exploration.epsilon <= 1.0, "exploration.epsilon",
          "must be in [0, 1]");
  require(c.sgd.cu_learning_rate > 0.0, "sgd.cu_learning_rate", "must be positive");
  require(c.sgd.pu_learning_rate > 0.0, "sgd.pu_learning_rate", "must be positive");
  require(!c.sgd.clip_norm || *c.sgd.clip_norm > 0.0, "sgd.clip_norm",
          "must be positive or null");
  require(c.replay.capacity >= 1, "replay.capacity", "must be positive");
  require(c.replay.batch_size >= 1, "replay.batch_size", "must be positive");
  require(!c.pretrain.lengths.empty(), "pretrain.lengths", "must not be empty");
  for (int len : c.pretrain.lengths)
    require(len >= 0, "pretrain.lengths", "entries must be non-negative");
  require(c.pretrain.episodes_per_length >= 1, "pretrain.episodes_per_length", "must be positive");
  require(c.pretrain.learning_rate > 0.0, "pretrain.learning_rate", "must be positive");
  require(c.pretrain.agreement_target > 0.0 && c.pretrain.agreement_target <= 1.0,
          "pretrain.agreement_target", "must be in (0, 1]");
  require(c.pretrain.epoch_cap >= 1, "pretrain.epoch_cap", "must be positive");
  require(c.pretrain.eval_chunk >= 1, "pretrain.eval_chunk", "must be positive");
  require(c.pretrain.holdout_fraction > 0.0 && c.pretrain.holdout_fraction < 1.0,
          "pretrain.holdout_fraction", "must be in (0, 1)");
  require(c.pretrain.noise_sigma >= 0.0, "pretrain.noise_sigma", "must be non-negative");
  require(c.episode_budget >= 0, "episode_budget", "must be non-negative");
  require(!c.out_dir.empty(), "out_dir", "must not be empty");
}

}  // namespace

std::string config_to_json(const RunConfig& c) {
  json j;
  j["mode"] = mode_name(c.mode);
  j["dyck"] = {{"num_bracket_types", c.dyck.num_bracket_types},
               {"close_probability", c.dyck.close_probability}};
  j["codebook_dim"] = c.codebook_dim;
  json ladder = {{"start_length", c.ladder.start_length},
                 {"window", c.ladder.window},
                 {"revisit_probability", c.ladder.revisit_probability},
                 {"unlock_threshold", c.ladder.unlock_threshold}};
  if (c.ladder.bracket_match_first) ladder["bracket_match_first"] = *c.ladder.bracket_match_first;
  j["ladder"] = ladder;
  j["model"] = {{"pu_hidden", c.model.pu_hidden}, {"cu_hidden", c.model.cu_hidden}};
  json reward = {{"scheme", scheme_name(c.reward.kind)}, {"gamma", c.reward.gamma}};
  j["reward"] = reward;
  j["exploration"] = {{"kind", exploration_name(c.exploration.kind)},
                      {"epsilon", c.exploration.epsilon}};
  json sgd = {{"cu_learning_rate", c.sgd.cu_learning_rate},
              {"pu_learning_rate", c.sgd.pu_learning_rate}};
  sgd["clip_norm"] = c.sgd.clip_norm ? json(*c.sgd.clip_norm) : json(nullptr);
  j["sgd"] = sgd;
  j["replay"] = {{"capacity", c.replay.capacity}, {"batch_size", c.replay.batch_size}};
  j["pretrain"] = {{"lengths", c.pretrain.lengths},
                   {"episodes_per_length", c.pretrain.episodes_per_length},
                   {"learning_rate", c.pretrain.learning_rate},
                   {"agreement_target", c.pretrain.agreement_target},
                   {"epoch_cap", c.pretrain.epoch_cap},
                   {"eval_chunk", c.pretrain.eval_chunk},
                   {"holdout_fraction", c.pretrain.holdout_fraction},
                   {"noise_sigma", c.pretrain.noise_sigma}};
  j["seed"] = c.seed;
  j["episode_budget"] = c.episode_budget;
  j["out_dir"] = c.out_dir;
  return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig c;
  ObjReader root(j, "");
  if (root.has("mode")) {
    std::string m;
    try {
      m = root.raw("mode").get<std::string>();
    } catch (const json::exception&) {
      fail_field("mode", "wrong type");
    }
    c.mode = mode_from(m);
  }
  if (root.has("dyck")) {
    ObjReader r(root.raw("dyck"), "dyck");
    r.read("num_bracket_types", c.dyck.num_bracket_types);
    r.read("close_probability", c.dyck.close_probability);
    r.finish();
  }
  root.read("codebook_dim", c.codebook_dim);
  if (root.has("ladder")) {
    ObjReader r(root.raw("ladder"), "ladder");
    r.read("start_length", c.ladder.start_length);
    r.read_optional_bool("bracket_match_first", c.ladder.bracket_match_first);
    r.read("window", c.ladder.window);
    r.read("revisit_probability", c.ladder.revisit_probability);
    r.read("unlock_threshold", c.ladder.unlock_threshold);
    r.finish();
  }
  if (root.has("model")) {
    ObjReader r(root.raw("model"), "model");
    r.read("pu_hidden", c.model.pu_hidden);
    r.read("cu_hidden", c.model.cu_hidden);
    r.finish();
  }
  if (root.has("reward")) {
    ObjReader r(root.raw("reward"), "reward");
    if (r.has("scheme")) {
      std::string s;
      try {
        s = r.raw("scheme").get<std::string>();
      } catch (const json::exception&) {
        fail_field("reward.scheme", "wrong type");
      }
      c.reward.kind = scheme_from(s);
    }
    r.read("gamma", c.reward.gamma);
    r.finish();
  }
  if (root.has("exploration")) {
    ObjReader r(root.raw("exploration"), "exploration");
    if (r.has("kind")) {
      std::string s;
      try {
        s = r.raw("kind").get<std::string>();
      } catch (const json::exception&) {
        fail_field("exploration.kind", "wrong type");
      }
      c.exploration.kind = exploration_from(s);
    }
    r.read("epsilon", c.exploration.epsilon);
    r.finish();
  }
  if (root.has("sgd")) {
    ObjReader r(root.raw("sgd"), "sgd");
    r.read("cu_learning_rate", c.sgd.cu_learning_rate);
    r.read("pu_learning_rate", c.sgd.pu_learning_rate);
    r.read_optional_double("clip_norm", c.sgd.clip_norm);
    r.finish();
  }
  if (root.has("replay")) {
    ObjReader r(root.raw("replay"), "replay");
    r.read("capacity", c.replay.capacity);
    r.read("batch_size", c.replay.batch_size);
    r.finish();
  }
  if (root.has("pretrain")) {
    ObjReader r(root.raw("pretrain"), "pretrain");
    r.read("lengths", c.pretrain.lengths);
    r.read("episodes_per_length", c.pretrain.episodes_per_length);
    r.read("learning_rate", c.pretrain.learning_rate);
    r.read("agreement_target", c.pretrain.agreement_target);
    r.read("epoch_cap", c.pretrain.epoch_cap);
    r.read("eval_chunk", c.pretrain.eval_chunk);
    r.read("holdout_fraction", c.pretrain.holdout_fraction);
    r.read("noise_sigma", c.pretrain.noise_sigma);
    r.finish();
  }
  root.read("seed", c.seed);
  root.read("episode_budget", c.episode_budget);
  root.read("out_dir", c.out_dir);
  root.finish();
  validate(c);
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return config_from_json(buf.str());
}

void save_config(const RunConfig& cfg, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write config file: " + path.string());
  os << config_to_json(cfg);
}

void save_checkpoint(const fs::path& dir, const RunConfig& cfg, const Mlp& cu, const Mlp& pu) {
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "cu.bin", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir / "cu.bin").string());
    cu.save(os);
  }
  {
    std::ofstream os(dir / "pu.bin", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir / "pu.bin").string());
    pu.save(os);
  }
  save_config(cfg, dir / "config.json");
}

namespace {

int observation_dim_for(const RunConfig& cfg) {
  return kNumNodes * cfg.codebook_dim + num_actions() + 4;
}

}  // namespace

Checkpoint load_checkpoint(const fs::path& dir) {
  Checkpoint ck;
  ck.config = load_config(dir / "config.json");
  {
    std::ifstream is(dir / "cu.bin", std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + (dir / "cu.bin").string());
    ck.cu = Mlp::load(is);
  }
  {
    std::ifstream is(dir / "pu.bin", std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + (dir / "pu.bin").string());
    ck.pu = Mlp::load(is);
  }
  if (ck.cu.input_dim() != observation_dim_for(ck.config) ||
      ck.cu.output_dim() != num_actions())
    throw ConfigError("checkpoint cu.bin dimensions do not match config.json");
  if (ck.pu.input_dim() != ck.config.codebook_dim || ck.pu.output_dim() != ck.config.codebook_dim)
    throw ConfigError("checkpoint pu.bin dimensions do not match config.json");
  return ck;
}

namespace {

json record_to_json(const EpisodeRecord& r) {
  json j;
  j["episode"] = r.episode;
  j["level"] = r.level;
  j["length"] = r.length;
  j["success"] = r.success;
  j["steps"] = r.steps;
  j["grad_norm"] = r.grad_norm;
  j["unlock"] = r.unlock;
  j["unlocked_index"] = r.unlocked_index;
  j["window_rate"] = r.window_rate;
  j["wall_ms"] = r.wall_ms;
  return j;
}

}  // namespace

TrainSummary run_train(const RunConfig& cfg, const TrainOptions& opts) {
  validate(cfg);
  fs::path out(cfg.out_dir);
  fs::create_directories(out);
  save_config(cfg, out / "config.json");
  std::ofstream metrics(out / "metrics.jsonl");
  if (!metrics) throw std::runtime_error("cannot write metrics.jsonl under " + out.string());

  SymbolCodebook codebook(cfg.dyck.num_bracket_types, cfg.codebook_dim,
                          derive_seed(cfg.seed, seed_stream::kCodebook));
  Mlp cu({observation_dim_for(cfg), cfg.model.cu_hidden, num_actions()}, HeadKind::Policy,
         derive_seed(cfg.seed, seed_stream::kCuInit));
  Mlp pu({cfg.codebook_dim, cfg.model.pu_hidden, cfg.codebook_dim}, HeadKind::Regression,
         derive_seed(cfg.seed, seed_stream::kPuInit));

  TrainSummary summary;
  summary.out_dir = out;

  if (cfg.mode == RunMode::Pretrained) {
    Rng trace_rng(derive_seed(cfg.seed, seed_stream::kPretrainTraces));
    auto traces = generate_traces(cfg.pretrain.lengths, cfg.pretrain.episodes_per_length,
                                  cfg.dyck, codebook, trace_rng);
    PretrainConfig pc;
    pc.sgd = SgdConfig{cfg.pretrain.learning_rate, cfg.sgd.clip_norm};
    pc.agreement_target = cfg.pretrain.agreement_target;
    pc.epoch_cap = cfg.pretrain.epoch_cap;
    pc.eval_chunk = cfg.pretrain.eval_chunk;
    pc.holdout_fraction = cfg.pretrain.holdout_fraction;
    Rng shuffle_rng(derive_seed(cfg.seed, seed_stream::kPretrainShuffle));
    PretrainResult res = pretrain_cu(cu, traces, pc, shuffle_rng);
    cu = cu.perturbed(cfg.pretrain.noise_sigma, derive_seed(cfg.seed, seed_stream::kNoise));
    summary.pretrain = res;
    json j;
    j["phase"] = "pretrain";
    j["train_examples"] = res.train_examples;
    j["holdout_examples"] = res.holdout_examples;
    j["holdout_agreement"] = res.holdout_agreement;
    j["epochs"] = res.epochs_run;
    j["updates"] = res.updates_run;
    j["reached_target"] = res.reached_target;
    j["noise_sigma"] = cfg.pretrain.noise_sigma;
    metrics << j.dump() << "\n";
    if (!opts.quiet)
      std::cerr << "pretrain: agreement " << res.holdout_agreement << " after "
                << res.updates_run << " updates\n";
  }

  CurriculumState curriculum(default_ladder(cfg.ladder.start_length, cfg.bracket_match_enabled()),
                             cfg.ladder.window, cfg.ladder.revisit_probability,
                             cfg.ladder.unlock_threshold);
  INState state(codebook, ProcessingUnit::learned(std::move(pu)));
  CuTrainer trainer(cfg.cu_sgd());
  ReplayBuffer replay(static_cast<std::size_t>(cfg.replay.capacity));
  Rng rng(derive_seed(cfg.seed, seed_stream::kEpisodes));
  SgdConfig pu_sgd = cfg.pu_sgd();

  long long ep = 0;
  bool stopped = false;
  for (; ep < cfg.episode_budget && !stopped; ++ep) {
    auto t0 = std::chrono::steady_clock::now();
    Level level = curriculum.next_level(rng);
    if (level.kind == Level::Kind::BracketMatch) {
      int type = uniform_int(rng, cfg.dyck.num_bracket_types);
      state.begin_task(
          TaskState::begin_with_prefix({BracketSymbol::open(type)}, rng, codebook));
    } else {
      state.begin_task(TaskState::begin(cfg.dyck, level.length, rng, codebook));
    }

    EpisodeTrace trace;
    double grad_norm = 0.0;
    if (level.kind == Level::Kind::BracketMatch) {
      trace = run_episode(state, oracle_selector, /*train_pu=*/true, pu_sgd);
    } else {
      trace = run_episode(
          state,
          [&](const INState&, const Vec& obs) {
            return select_action(cu, obs, cfg.exploration, rng);
          },
          /*train_pu=*/true, pu_sgd);
      auto weights = compute_returns(trace, cfg.reward);
      replay.push_episode(trace, weights);
      auto batch = replay.sample(static_cast<std::size_t>(cfg.replay.batch_size), rng);
      grad_norm = trainer.train_batch(cu, batch);
    }

    bool advanced = curriculum.record_result(level, trace.success);
    state.drop_inactive_memory();

    EpisodeRecord rec;
    rec.episode = ep;
    rec.level = level.name();
    rec.length = level.kind == Level::Kind::BracketMatch ? 1 : level.length;
    rec.success = trace.success;
    rec.steps = static_cast<int>(trace.steps.size());
    rec.grad_norm = grad_norm;
    rec.unlock = advanced;
    rec.unlocked_index = static_cast<int>(curriculum.unlocked_index());
    rec.window_rate = curriculum.window_rate(curriculum.level_index(level));
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    metrics << record_to_json(rec).dump() << "\n";

    if (advanced) {
      summary.unlocks.push_back({level.name(), ep});
      save_checkpoint(out / ("ckpt_unlock_" + level.name()), cfg, cu, state.pu().net());
    }
    if (!opts.quiet && (ep % 1000 == 0 || advanced))
      std::cerr << "episode " << ep << " level " << level.name() << " window "
                << curriculum.window_rate(curriculum.level_index(level))
                << (advanced ? "  [unlock]" : "") << "\n";
    if (opts.on_episode && !opts.on_episode(rec)) stopped = true;
  }

  summary.episodes = ep;
  for (std::size_t i = 0; i < curriculum.ladder().size(); ++i)
    summary.final_window_rates[curriculum.ladder()[i].name()] = curriculum.window_rate(i);
  save_checkpoint(out / "ckpt_final", cfg, cu, state.pu().net());
  return summary;
}

namespace {

// Shared machinery for eval and trace: build the state and the selector.
struct PolicyRig {
  RunConfig cfg;
  std::optional<Mlp> cu;
  SymbolCodebook codebook;
  INState state;
  bool oracle = false;

  PolicyRig(RunConfig cfg_in, std::optional<Mlp> cu_in, std::optional<Mlp> pu_in, bool oracle_in)
      : cfg(std::move(cfg_in)),
        cu(std::move(cu_in)),
        codebook(cfg.dyck.num_bracket_types, cfg.codebook_dim,
                 derive_seed(cfg.seed, seed_stream::kCodebook)),
        state(codebook,
              pu_in ? ProcessingUnit::learned(std::move(*pu_in)) : ProcessingUnit::exact()),
        oracle(oracle_in) {}

  ActionSelector selector(const ExplorationPolicy& exploration, Rng& rng) {
    if (oracle) return oracle_selector;
    return [this, exploration, &rng](const INState&, const Vec& obs) {
      return select_action(*cu, obs, exploration, rng);
    };
  }

  // A fresh machine has every node zeroed — a state a trained policy never
  // operates from: once training's warm-up phase has run, each episode starts
  // from the previous episode's end state. One unscored scripted episode puts
  // the machine into that working regime before any scored episode runs.
  void warm_up(Rng& rng) {
    state.begin_task(TaskState::begin(cfg.dyck, 2, rng, codebook));
    run_episode(state, oracle_selector, /*train_pu=*/false, SgdConfig{});
    state.drop_inactive_memory();
  }
};

PolicyRig make_rig(const fs::path& checkpoint, bool oracle, const RunConfig& fallback_cfg) {
  if (oracle) return PolicyRig(fallback_cfg, std::nullopt, std::nullopt, true);
  Checkpoint ck = load_checkpoint(checkpoint);
  return PolicyRig(std::move(ck.config), std::move(ck.cu), std::move(ck.pu), false);
}

}  // namespace

std::vector<EvalRow> run_eval(const EvalOptions& opts) {
  if (!opts.oracle && opts.checkpoint.empty())
    throw ConfigError("run_eval: need a checkpoint directory or oracle mode");
  PolicyRig rig = make_rig(opts.checkpoint, opts.oracle, opts.config);
  Rng rng(derive_seed(opts.seed, seed_stream::kEval));
  ExplorationPolicy exploration{opts.deterministic ? ExplorationPolicy::Kind::Deterministic
                                                   : ExplorationPolicy::Kind::SampleFromPolicy,
                                0.0};
  ActionSelector select = rig.selector(exploration, rng);
  rig.warm_up(rng);

  std::vector<EvalRow> rows;
  for (int length : opts.lengths) {
    EvalRow row;
    row.length = length;
    row.episodes = opts.episodes_per_length;
    for (int e = 0; e < opts.episodes_per_length; ++e) {
      rig.state.begin_task(TaskState::begin(rig.cfg.dyck, length, rng, rig.codebook));
      EpisodeTrace trace = run_episode(rig.state, select, /*train_pu=*/false, SgdConfig{});
      row.successes += trace.success ? 1 : 0;
      rig.state.drop_inactive_memory();
    }
    row.rate = row.episodes > 0
                   ? static_cast<double>(row.successes) / static_cast<double>(row.episodes)
                   : 0.0;
    rows.push_back(row);
  }
  return rows;
}

int run_trace(const TraceOptions& opts, std::ostream& os) {
  if (!opts.oracle && opts.checkpoint.empty())
    throw ConfigError("run_trace: need a checkpoint directory or oracle mode");
  PolicyRig rig = make_rig(opts.checkpoint, opts.oracle, opts.config);
  Rng rng(derive_seed(opts.seed, seed_stream::kEval));
  ExplorationPolicy exploration{ExplorationPolicy::Kind::Deterministic, 0.0};
  ActionSelector select = rig.selector(exploration, rng);
  rig.warm_up(rng);

  const SymbolCodebook& cb = rig.codebook;
  auto render = [&cb](const Vec& v) -> char {
    if (is_zero(v)) return '.';
    if (auto s = cb.try_decode(v, cb.decode_margin())) return symbol_char(*s);
    return '?';
  };

  rig.state.begin_task(TaskState::begin(rig.cfg.dyck, opts.length, rng, rig.codebook));
  int step_idx = 0;
  StepObserver observer = [&](const INState& s, const TraceStep& step) {
    std::ostringstream line;
    line << std::setw(5) << step_idx++ << "  " << std::left << std::setw(34)
         << action_space()[static_cast<std::size_t>(step.action)].name() << std::right
         << " in=" << render(s.node(NodeId::TaskInput)) << " puIn=" << render(s.node(NodeId::PuInput))
         << " out=" << render(s.node(NodeId::TaskOutput))
         << " sel=" << render(s.node(NodeId::HashSelect))
         << " pkL=" << render(s.node(NodeId::PeekLeft))
         << " pkR=" << render(s.node(NodeId::PeekRight)) << " mem=" << s.memory().active_size();
    for (const auto& oc : step.outcomes) {
      line << " submit=" << symbol_char(oc.decoded) << " expect=" << symbol_char(oc.expected)
           << (oc.matched ? " ok" : " MISS");
      if (oc.episode_done) line << " done reward=" << *oc.final_reward;
    }
    os << line.str() << "\n";
  };

  EpisodeTrace trace = run_episode(rig.state, select, /*train_pu=*/false, SgdConfig{}, observer);
  const TaskState& t = rig.state.task();
  os << "length=" << t.instance().prefix.size() << " prefix=" << to_text(t.instance().prefix)
     << " target=" << to_text(t.instance().target)
     << " submissions=" << to_text(t.submissions()) << " success=" << (trace.success ? 1 : 0)
     << " reward=" << trace.final_reward << " steps=" << trace.steps.size()
     << " budget=" << t.step_budget() << "\n";
  return trace.final_reward;
}

}  // namespace dyckin
