#include "dyckin/taskenv.hpp"

#include <stdexcept>

namespace dyckin {

TaskInstance TaskInstance::from_prefix(std::vector<BracketSymbol> prefix) {
  TaskInstance inst;
  inst.target = required_completion(prefix);  // validates the prefix
  inst.input_with_terminator = prefix;
  inst.input_with_terminator.push_back(BracketSymbol::terminator());
  inst.prefix = std::move(prefix);
  return inst;
}

TaskState::TaskState(TaskInstance inst, Rng& rng, const SymbolCodebook& codebook)
    : inst_(std::move(inst)), codebook_(codebook) {
  nonce_.resize(static_cast<std::size_t>(codebook_.dim()));
  for (auto& x : nonce_) x = uniform_range(rng, -1.0, 1.0);
  budget_ = kBudgetFactor *
            static_cast<int>(inst_.prefix.size() + inst_.target.size());
}

TaskState TaskState::begin(const DyckConfig& cfg, int length, Rng& rng,
                           const SymbolCodebook& codebook) {
  if (cfg.num_bracket_types != codebook.num_bracket_types())
    throw std::invalid_argument("TaskState::begin: codebook bracket-type count mismatch");
  auto prefix = generate_prefix(cfg, length, rng);
  return TaskState(TaskInstance::from_prefix(std::move(prefix)), rng, codebook);
}

TaskState TaskState::begin_with_prefix(std::vector<BracketSymbol> prefix, Rng& rng,
                                       const SymbolCodebook& codebook) {
  for (const auto& s : prefix)
    if (!s.is_terminator() && s.type_index >= codebook.num_bracket_types())
      throw std::invalid_argument("TaskState::begin_with_prefix: symbol outside codebook");
  return TaskState(TaskInstance::from_prefix(std::move(prefix)), rng, codebook);
}

Vec TaskState::move_cursor(CursorDir dir) {
  int last = static_cast<int>(inst_.input_with_terminator.size()) - 1;
  if (dir == CursorDir::Next)
    raw_cursor_ = std::min(raw_cursor_ + 1, last);
  else
    raw_cursor_ = std::max(raw_cursor_ - 1, 0);
  return codebook_.code(inst_.input_with_terminator[static_cast<std::size_t>(raw_cursor_)]);
}

SubmissionOutcome TaskState::submit(const Vec& v) {
  if (done_) throw std::logic_error("TaskState::submit: episode already ended");
  SubmissionOutcome out;
  out.decoded = codebook_.decode(v);
  out.expected = submissions_.size() < inst_.target.size()
                     ? inst_.target[submissions_.size()]
                     : BracketSymbol::terminator();
  out.matched = out.decoded == out.expected;
  out.mse_target = codebook_.code(out.expected);
  if (!out.matched) mismatch_ = true;
  submissions_.push_back(out.decoded);

  if (out.decoded.is_terminator() || submissions_.size() > inst_.target.size()) {
    done_ = true;
    reward_ = submissions_ == inst_.target ? 1 : 0;
    out.final_reward = reward_;
  }
  out.episode_done = done_;
  return out;
}

Vec TaskState::indicators() const {
  double len = static_cast<double>(inst_.prefix.size());
  double pos = len == 0.0 ? 1.0 : static_cast<double>(cursor()) / len;
  double budget_frac =
      budget_ > 0 ? static_cast<double>(steps_) / static_cast<double>(budget_) : 1.0;
  return Vec{pos, len / kMaxLengthScale, budget_frac};
}

void TaskState::finalize_timeout() {
  if (done_) return;
  done_ = true;
  reward_ = submissions_ == inst_.target ? 1 : 0;
}

int TaskState::final_reward() const {
  if (!done_) throw std::logic_error("TaskState::final_reward: episode still running");
  return reward_;
}

}  // namespace dyckin
