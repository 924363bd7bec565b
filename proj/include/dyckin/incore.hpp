#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dyckin/common.hpp"
#include "dyckin/dyck.hpp"
#include "dyckin/memory.hpp"
#include "dyckin/taskenv.hpp"
#include "dyckin/vecnn.hpp"

namespace dyckin {

// The nine persistent value nodes. Values survive across episodes and change
// only when an action writes them.
enum class NodeId : int {
  TaskNew = 0,         // task nonce at episode start, zeros after the first action
  TaskInput = 1,       // symbol under the task cursor, set by cursor moves
  PuInput = 2,         // any write here triggers the processing unit
  TaskOutput = 3,      // last processing-unit output (= last submission)
  HashSelect = 4,      // selector consumed by SelectHash
  AppendLeftSlot = 5,  // value consumed by AppendLeft
  AppendRightSlot = 6, // value consumed by AppendRight
  PeekLeft = 7,        // mirrors the left end of the active deque
  PeekRight = 8,       // mirrors the right end of the active deque
};

inline constexpr int kNumNodes = 9;
const char* node_name(NodeId id);

enum class ActionKind : std::uint8_t {
  NextInput,
  PrevInput,
  SelectHash,
  AppendLeft,
  AppendRight,
  PopLeft,
  PopRight,
  Copy,
};

struct Action {
  ActionKind kind = ActionKind::NextInput;
  NodeId src = NodeId::TaskNew;  // Copy only
  NodeId dst = NodeId::TaskNew;  // Copy only

  static Action primitive(ActionKind k) { return {k, NodeId::TaskNew, NodeId::TaskNew}; }
  static Action copy(NodeId src, NodeId dst) { return {ActionKind::Copy, src, dst}; }

  std::string name() const;
  bool operator==(const Action&) const = default;
};

// The fixed action space: seven primitives followed by ten copy edges. Order
// is stable; policies and checkpoints depend on it.
const std::vector<Action>& action_space();
inline int num_actions() { return static_cast<int>(action_space().size()); }
int action_index(const Action& a);  // throws std::invalid_argument if absent
inline int primitive_action_index(ActionKind k) { return action_index(Action::primitive(k)); }
inline int copy_action_index(NodeId src, NodeId dst) { return action_index(Action::copy(src, dst)); }

struct TraceStep {
  Vec observation;  // what the policy saw before acting
  int action = 0;
  std::vector<SubmissionOutcome> outcomes;
};

struct EpisodeTrace {
  std::vector<TraceStep> steps;
  int final_reward = 0;
  bool success = false;
  int task_length = 0;
};

// Symbol mapper sitting between PuInput and the task: either a trainable net
// or the exact codebook map (openers to their closers, everything else to
// itself) used for plumbing checks and trace generation.
class ProcessingUnit {
 public:
  static ProcessingUnit learned(Mlp net);
  static ProcessingUnit exact();

  Vec forward(const Vec& x, const SymbolCodebook& codebook) const;
  // MSE step toward target; no-op returning 0 for the exact unit.
  double train_step(const Vec& x, const Vec& target, const SgdConfig& cfg);

  bool trainable() const { return net_.has_value(); }
  const Mlp& net() const;
  Mlp& net();

 private:
  std::optional<Mlp> net_;  // nullopt = exact codebook map
};

// The assembled machine: nine nodes, the deque memory, the processing unit,
// and the current task. One apply_action call is one machine iteration.
class INState {
 public:
  INState(SymbolCodebook codebook, ProcessingUnit pu);

  // Installs a task: TaskNew gets the task nonce, the last-action marker
  // clears. All other node values and the memory persist from before.
  void begin_task(TaskState task);

  // Executes one action. Writes into PuInput run the processing unit, store
  // its output in TaskOutput, and submit that output to the task. Returns the
  // submissions this action caused (at most one).
  std::vector<SubmissionOutcome> apply_action(int action_idx, bool train_pu, const SgdConfig& pu_cfg);

  // Feature layout: nine node vectors, one-hot of the last action, the three
  // task indicators, then log(1 + active deque size) / log(1 + 1000).
  Vec observe() const;
  int observation_dim() const;

  const Vec& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const HashDequeMemory& memory() const { return memory_; }
  bool has_task() const { return task_.has_value(); }
  const TaskState& task() const;
  TaskState& task();
  const SymbolCodebook& codebook() const { return codebook_; }
  const ProcessingUnit& pu() const { return pu_; }
  ProcessingUnit& pu() { return pu_; }
  std::optional<int> last_action() const { return last_action_; }
  std::uint64_t submission_count() const { return submission_count_; }

  void finalize_timeout_if_needed();
  // Between-episode housekeeping: forget all non-active deques.
  void drop_inactive_memory() { memory_.drop_inactive(); }

 private:
  void refresh_peeks();
  Vec& node_mut(NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }

  SymbolCodebook codebook_;
  ProcessingUnit pu_;
  std::array<Vec, kNumNodes> nodes_;
  HashDequeMemory memory_;
  std::optional<TaskState> task_;
  std::optional<int> last_action_;
  bool first_action_done_ = false;
  std::uint64_t submission_count_ = 0;
};

using ActionSelector = std::function<int(const INState&, const Vec& observation)>;
using StepObserver = std::function<void(const INState&, const TraceStep&)>;

// Runs the installed task to completion: terminator submitted, submissions
// outgrew the target, or the step budget ran out. Ends within the budget.
EpisodeTrace run_episode(INState& state, const ActionSelector& select, bool train_pu,
                         const SgdConfig& pu_cfg, const StepObserver& observer = {});

}  // namespace dyckin
