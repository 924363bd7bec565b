#include "dyckin/curriculum.hpp"

#include <algorithm>
#include <cmath>

#include "dyckin/taskenv.hpp"

namespace dyckin {

std::string Level::name() const {
  if (kind == Kind::BracketMatch) return "BM";
  return "D" + std::to_string(length);
}

std::vector<Level> default_ladder(int start_length, bool include_bracket_match) {
  if (start_length < 2) throw std::invalid_argument("default_ladder: start_length must be >= 2");
  std::vector<Level> out;
  if (include_bracket_match) out.push_back(Level::bracket_match());
  int len = start_length;
  if (len <= 10) {
    for (; len <= 10; len += 2) out.push_back(Level::dyck(len));
  } else {
    out.push_back(Level::dyck(len));
  }
  int last = out.back().kind == Level::Kind::DyckCompletion ? out.back().length : 0;
  if (last < 100) out.push_back(Level::dyck(100));
  if (last < 1000) out.push_back(Level::dyck(1000));
  return out;
}

CurriculumState::CurriculumState(std::vector<Level> ladder, int window, double revisit_probability,
                                 double unlock_threshold)
    : ladder_(std::move(ladder)),
      window_(window),
      revisit_p_(revisit_probability),
      threshold_(unlock_threshold) {
  if (ladder_.empty()) throw std::invalid_argument("CurriculumState: empty ladder");
  if (window_ < 1) throw std::invalid_argument("CurriculumState: window must be positive");
  if (!(revisit_p_ >= 0.0 && revisit_p_ <= 1.0))
    throw std::invalid_argument("CurriculumState: revisit_probability must be in [0, 1]");
  if (!(threshold_ > 0.0 && threshold_ <= 1.0))
    throw std::invalid_argument("CurriculumState: unlock_threshold must be in (0, 1]");
  for (std::size_t i = 0; i < ladder_.size(); ++i)
    for (std::size_t j = i + 1; j < ladder_.size(); ++j)
      if (ladder_[i] == ladder_[j])
        throw std::invalid_argument("CurriculumState: duplicate ladder level");
  windows_.resize(ladder_.size());
}

const Level& CurriculumState::next_level(Rng& rng) {
  if (unlocked_ > 0 && revisit_p_ > 0.0 && uniform01(rng) < revisit_p_)
    return ladder_[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(unlocked_)))];
  return ladder_[unlocked_];
}

std::size_t CurriculumState::level_index(const Level& level) const {
  for (std::size_t i = 0; i < ladder_.size(); ++i)
    if (ladder_[i] == level) return i;
  throw std::invalid_argument("CurriculumState: level not in ladder: " + level.name());
}

bool CurriculumState::record_result(const Level& level, bool success) {
  std::size_t idx = level_index(level);
  auto& win = windows_[idx];
  if (win.size() == static_cast<std::size_t>(window_)) win.pop_front();
  win.push_back(success ? 1 : 0);

  if (idx != unlocked_) return false;
  if (win.size() < static_cast<std::size_t>(window_)) return false;
  long hits = std::count(win.begin(), win.end(), char(1));
  double rate = static_cast<double>(hits) / static_cast<double>(window_);
  if (rate + 1e-12 < threshold_) return false;
  if (unlocked_ + 1 >= ladder_.size()) return false;
  ++unlocked_;
  return true;
}

double CurriculumState::window_rate(std::size_t level_index) const {
  const auto& win = windows_.at(level_index);
  if (win.empty()) return 0.0;
  long hits = std::count(win.begin(), win.end(), char(1));
  return static_cast<double>(hits) / static_cast<double>(win.size());
}

std::size_t CurriculumState::window_fill(std::size_t level_index) const {
  return windows_.at(level_index).size();
}

namespace {

// Action indices the oracle uses, resolved once.
struct OracleActions {
  int copy_nonce_to_select = copy_action_index(NodeId::TaskNew, NodeId::HashSelect);
  int select_hash = primitive_action_index(ActionKind::SelectHash);
  int next_input = primitive_action_index(ActionKind::NextInput);
  int copy_input_to_right_slot = copy_action_index(NodeId::TaskInput, NodeId::AppendRightSlot);
  int append_right = primitive_action_index(ActionKind::AppendRight);
  int pop_right = primitive_action_index(ActionKind::PopRight);
  int copy_peek_right_to_pu = copy_action_index(NodeId::PeekRight, NodeId::PuInput);
  int copy_input_to_pu = copy_action_index(NodeId::TaskInput, NodeId::PuInput);
};

const OracleActions& oracle_actions() {
  static const OracleActions acts;
  return acts;
}

}  // namespace

int oracle_action(const INState& state) {
  const auto& acts = oracle_actions();
  const SymbolCodebook& cb = state.codebook();

  // A fresh episode is the only time TaskNew is non-zero.
  if (!is_zero(state.node(NodeId::TaskNew))) return acts.copy_nonce_to_select;

  if (!state.last_action())
    throw OracleUndefinedError("oracle_action: no last action and no task nonce");
  int last = *state.last_action();

  auto decode_input = [&]() -> BracketSymbol {
    auto s = cb.try_decode(state.node(NodeId::TaskInput), cb.decode_margin());
    if (!s) throw OracleUndefinedError("oracle_action: TaskInput does not decode to a symbol");
    return *s;
  };
  // After the terminator was read: emit stored closers right-to-left, then
  // hand the terminator itself to the processing unit.
  auto emit_or_finish = [&]() {
    return state.memory().active_size() > 0 ? acts.copy_peek_right_to_pu : acts.copy_input_to_pu;
  };

  if (last == acts.copy_nonce_to_select) return acts.select_hash;
  if (last == acts.select_hash) return acts.next_input;
  if (last == acts.next_input) {
    BracketSymbol s = decode_input();
    if (s.is_open()) return acts.copy_input_to_right_slot;
    if (s.is_close()) return acts.pop_right;
    return emit_or_finish();
  }
  if (last == acts.copy_input_to_right_slot) return acts.append_right;
  if (last == acts.append_right) return acts.next_input;
  if (last == acts.pop_right) {
    BracketSymbol s = decode_input();
    if (s.is_close()) return acts.next_input;  // consumed a closer while reading
    if (s.is_terminator()) return emit_or_finish();
    throw OracleUndefinedError("oracle_action: opener under cursor after PopRight");
  }
  if (last == acts.copy_peek_right_to_pu) return acts.pop_right;
  // A learned processing unit may submit something that does not decode to the
  // terminator, so the episode can outlive the intended final submission; keep
  // submitting until the ledger overflow ends it.
  if (last == acts.copy_input_to_pu) return emit_or_finish();
  throw OracleUndefinedError("oracle_action: unexpected last action " +
                             action_space()[static_cast<std::size_t>(last)].name());
}

std::vector<TraceExample> generate_traces(const std::vector<int>& lengths, int count_per_length,
                                          const DyckConfig& cfg, const SymbolCodebook& codebook,
                                          Rng& rng) {
  if (lengths.empty()) throw std::invalid_argument("generate_traces: no lengths");
  if (count_per_length < 1)
    throw std::invalid_argument("generate_traces: count_per_length must be positive");

  std::vector<TraceExample> out;
  INState state(codebook, ProcessingUnit::exact());
  int episode = 0;
  for (int length : lengths) {
    for (int c = 0; c < count_per_length; ++c, ++episode) {
      state.begin_task(TaskState::begin(cfg, length, rng, codebook));
      EpisodeTrace trace = run_episode(state, oracle_selector, /*train_pu=*/false, SgdConfig{});
      if (!trace.success)
        throw std::logic_error("generate_traces: oracle episode failed at length " +
                               std::to_string(length));
      for (std::size_t t = 0; t < trace.steps.size(); ++t)
        out.push_back({std::move(trace.steps[t].observation), trace.steps[t].action, episode,
                       static_cast<int>(t)});
      state.drop_inactive_memory();
    }
  }
  return out;
}

double greedy_agreement(const Mlp& policy, const std::vector<TraceExample>& examples) {
  if (examples.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& ex : examples) {
    Vec p = policy.policy_distribution(ex.observation);
    int greedy = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    if (greedy == ex.action) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

PretrainResult pretrain_cu(Mlp& policy, const std::vector<TraceExample>& traces,
                           const PretrainConfig& cfg, Rng& rng) {
  if (traces.empty()) throw std::invalid_argument("pretrain_cu: no training examples");
  if (!(cfg.holdout_fraction > 0.0 && cfg.holdout_fraction < 1.0))
    throw std::invalid_argument("pretrain_cu: holdout_fraction must be in (0, 1)");
  if (!(cfg.agreement_target > 0.0 && cfg.agreement_target <= 1.0))
    throw std::invalid_argument("pretrain_cu: agreement_target must be in (0, 1]");
  if (cfg.epoch_cap < 1) throw std::invalid_argument("pretrain_cu: epoch_cap must be positive");

  // Hand-rolled Fisher-Yates so the split does not depend on library internals.
  std::vector<std::size_t> order(traces.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto shuffle = [&rng](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(i)))]);
  };
  shuffle(order);

  std::size_t holdout_n = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg.holdout_fraction * static_cast<double>(traces.size()))));
  holdout_n = std::min(holdout_n, traces.size() - 1);

  std::vector<TraceExample> holdout;
  holdout.reserve(holdout_n);
  std::vector<std::size_t> train_idx;
  train_idx.reserve(traces.size() - holdout_n);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i < holdout_n)
      holdout.push_back(traces[order[i]]);
    else
      train_idx.push_back(order[i]);
  }

  PretrainResult res;
  res.train_examples = train_idx.size();
  res.holdout_examples = holdout.size();
  res.holdout_agreement = greedy_agreement(policy, holdout);
  if (res.holdout_agreement >= cfg.agreement_target) {
    res.reached_target = true;
    return res;
  }

  long long since_eval = 0;
  for (int epoch = 0; epoch < cfg.epoch_cap && !res.reached_target; ++epoch) {
    res.epochs_run = epoch + 1;
    shuffle(train_idx);
    for (std::size_t k = 0; k < train_idx.size(); ++k) {
      const TraceExample& ex = traces[train_idx[k]];
      policy.reinforce_step(ex.observation, ex.action, 1.0, cfg.sgd);
      ++res.updates_run;
      if (++since_eval >= cfg.eval_chunk) {
        since_eval = 0;
        res.holdout_agreement = greedy_agreement(policy, holdout);
        if (res.holdout_agreement >= cfg.agreement_target) {
          res.reached_target = true;
          break;
        }
      }
    }
    if (!res.reached_target) {
      res.holdout_agreement = greedy_agreement(policy, holdout);
      res.reached_target = res.holdout_agreement >= cfg.agreement_target;
    }
  }
  return res;
}

}  // namespace dyckin
