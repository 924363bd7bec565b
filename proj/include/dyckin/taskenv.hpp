#pragma once

#include <optional>
#include <vector>

#include "dyckin/common.hpp"
#include "dyckin/dyck.hpp"

namespace dyckin {

// One completion task: the input presented to the agent is the prefix followed
// by the terminator; the target is the required completion (terminator
// included). Reward is 1 exactly when the submitted symbol sequence equals the
// target, 0 otherwise, and is only revealed when the episode ends.
struct TaskInstance {
  std::vector<BracketSymbol> prefix;
  std::vector<BracketSymbol> target;
  std::vector<BracketSymbol> input_with_terminator;

  static TaskInstance from_prefix(std::vector<BracketSymbol> prefix);
};

enum class CursorDir { Next, Prev };

struct SubmissionOutcome {
  BracketSymbol decoded;
  BracketSymbol expected;
  bool matched = false;
  bool episode_done = false;
  std::optional<int> final_reward;  // present exactly when episode_done
  Vec mse_target;                   // code of the expected symbol
};

// Cursor-driven view of one task plus the submission ledger. The cursor starts
// unset: nothing is delivered until the first move, and the first move
// delivers the symbol at position 0 so the whole input is reachable through
// repeated Next moves. Each task carries a fresh random nonce vector usable as
// a never-seen-before memory selector.
class TaskState {
 public:
  static constexpr int kBudgetFactor = 8;
  static constexpr double kMaxLengthScale = 1000.0;

  static TaskState begin(const DyckConfig& cfg, int length, Rng& rng, const SymbolCodebook& codebook);
  static TaskState begin_with_prefix(std::vector<BracketSymbol> prefix, Rng& rng,
                                     const SymbolCodebook& codebook);

  // Moves the cursor (clamped to the input) and returns the code of the symbol
  // at the new position.
  Vec move_cursor(CursorDir dir);

  // Decodes the submitted vector, appends it to the ledger, and reports the
  // match against the next expected target symbol. The episode ends when the
  // decoded symbol is the terminator or the ledger outgrows the target.
  SubmissionOutcome submit(const Vec& v);

  // [cursor position / prefix length, prefix length / 1000, steps / budget]
  Vec indicators() const;

  void count_step() { ++steps_; }
  // Ends the episode when the step budget ran out without a closing submission.
  void finalize_timeout();

  int cursor() const { return raw_cursor_ < 0 ? 0 : raw_cursor_; }
  bool cursor_at_terminator() const {
    return raw_cursor_ == static_cast<int>(inst_.input_with_terminator.size()) - 1;
  }
  bool done() const { return done_; }
  int final_reward() const;
  bool mismatch() const { return mismatch_; }
  int steps_taken() const { return steps_; }
  int step_budget() const { return budget_; }
  bool budget_exhausted() const { return steps_ >= budget_; }
  const TaskInstance& instance() const { return inst_; }
  const Vec& nonce() const { return nonce_; }
  const std::vector<BracketSymbol>& submissions() const { return submissions_; }
  const SymbolCodebook& codebook() const { return codebook_; }

 private:
  TaskState(TaskInstance inst, Rng& rng, const SymbolCodebook& codebook);

  TaskInstance inst_;
  SymbolCodebook codebook_;
  Vec nonce_;
  int raw_cursor_ = -1;  // -1 until the first move delivers position 0
  std::vector<BracketSymbol> submissions_;
  bool mismatch_ = false;
  bool done_ = false;
  int reward_ = 0;
  int steps_ = 0;
  int budget_ = 0;
};

}  // namespace dyckin
