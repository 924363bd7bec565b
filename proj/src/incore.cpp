#include "dyckin/incore.hpp"

#include <cmath>
#include <stdexcept>

namespace dyckin {

const char* node_name(NodeId id) {
  switch (id) {
    case NodeId::TaskNew: return "TaskNew";
    case NodeId::TaskInput: return "TaskInput";
    case NodeId::PuInput: return "PuInput";
    case NodeId::TaskOutput: return "TaskOutput";
    case NodeId::HashSelect: return "HashSelect";
    case NodeId::AppendLeftSlot: return "AppendLeftSlot";
    case NodeId::AppendRightSlot: return "AppendRightSlot";
    case NodeId::PeekLeft: return "PeekLeft";
    case NodeId::PeekRight: return "PeekRight";
  }
  throw std::invalid_argument("node_name: bad id");
}

std::string Action::name() const {
  switch (kind) {
    case ActionKind::NextInput: return "NextInput";
    case ActionKind::PrevInput: return "PrevInput";
    case ActionKind::SelectHash: return "SelectHash";
    case ActionKind::AppendLeft: return "AppendLeft";
    case ActionKind::AppendRight: return "AppendRight";
    case ActionKind::PopLeft: return "PopLeft";
    case ActionKind::PopRight: return "PopRight";
    case ActionKind::Copy:
      return std::string("Copy(") + node_name(src) + "->" + node_name(dst) + ")";
  }
  throw std::invalid_argument("Action::name: bad kind");
}

const std::vector<Action>& action_space() {
  static const std::vector<Action> kActions = {
      Action::primitive(ActionKind::NextInput),
      Action::primitive(ActionKind::PrevInput),
      Action::primitive(ActionKind::SelectHash),
      Action::primitive(ActionKind::AppendLeft),
      Action::primitive(ActionKind::AppendRight),
      Action::primitive(ActionKind::PopLeft),
      Action::primitive(ActionKind::PopRight),
      Action::copy(NodeId::TaskInput, NodeId::PuInput),
      Action::copy(NodeId::TaskInput, NodeId::AppendLeftSlot),
      Action::copy(NodeId::TaskInput, NodeId::AppendRightSlot),
      Action::copy(NodeId::PeekLeft, NodeId::PuInput),
      Action::copy(NodeId::PeekRight, NodeId::PuInput),
      Action::copy(NodeId::TaskNew, NodeId::HashSelect),
      Action::copy(NodeId::TaskInput, NodeId::HashSelect),
      Action::copy(NodeId::PeekRight, NodeId::AppendLeftSlot),
      Action::copy(NodeId::PeekLeft, NodeId::AppendRightSlot),
      Action::copy(NodeId::TaskOutput, NodeId::PuInput),
  };
  return kActions;
}

int action_index(const Action& a) {
  const auto& space = action_space();
  for (std::size_t i = 0; i < space.size(); ++i)
    if (space[i] == a) return static_cast<int>(i);
  throw std::invalid_argument("action_index: action not in the action space: " + a.name());
}

ProcessingUnit ProcessingUnit::learned(Mlp net) {
  ProcessingUnit pu;
  pu.net_ = std::move(net);
  return pu;
}

ProcessingUnit ProcessingUnit::exact() { return ProcessingUnit{}; }

Vec ProcessingUnit::forward(const Vec& x, const SymbolCodebook& codebook) const {
  if (net_) return net_->forward(x);
  BracketSymbol s = codebook.decode(x);
  if (s.is_open()) s = BracketSymbol::close(s.type_index);
  return codebook.code(s);
}

double ProcessingUnit::train_step(const Vec& x, const Vec& target, const SgdConfig& cfg) {
  if (!net_) return 0.0;
  return net_->train_mse_step(x, target, cfg);
}

const Mlp& ProcessingUnit::net() const {
  if (!net_) throw std::logic_error("ProcessingUnit::net: exact unit has no parameters");
  return *net_;
}

Mlp& ProcessingUnit::net() {
  if (!net_) throw std::logic_error("ProcessingUnit::net: exact unit has no parameters");
  return *net_;
}

INState::INState(SymbolCodebook codebook, ProcessingUnit pu)
    : codebook_(std::move(codebook)), pu_(std::move(pu)), memory_(codebook_.dim()) {
  for (auto& n : nodes_) n = zeros(static_cast<std::size_t>(codebook_.dim()));
  // Keep a deque selected at all times so every action is legal from step one.
  memory_.select_hash(memory_.sentinel());
  refresh_peeks();
}

void INState::begin_task(TaskState task) {
  if (task.codebook().dim() != codebook_.dim())
    throw std::invalid_argument("INState::begin_task: task codebook dimension mismatch");
  task_ = std::move(task);
  node_mut(NodeId::TaskNew) = task_->nonce();
  last_action_.reset();
  first_action_done_ = false;
}

const TaskState& INState::task() const {
  if (!task_) throw std::logic_error("INState: no task installed");
  return *task_;
}

TaskState& INState::task() {
  if (!task_) throw std::logic_error("INState: no task installed");
  return *task_;
}

void INState::refresh_peeks() {
  node_mut(NodeId::PeekLeft) = memory_.peek_left();
  node_mut(NodeId::PeekRight) = memory_.peek_right();
}

int INState::observation_dim() const { return kNumNodes * codebook_.dim() + num_actions() + 4; }

Vec INState::observe() const {
  const TaskState& t = task();
  Vec out;
  out.reserve(static_cast<std::size_t>(observation_dim()));
  for (const auto& n : nodes_) out.insert(out.end(), n.begin(), n.end());
  Vec one_hot(static_cast<std::size_t>(num_actions()), 0.0);
  if (last_action_) one_hot[static_cast<std::size_t>(*last_action_)] = 1.0;
  out.insert(out.end(), one_hot.begin(), one_hot.end());
  Vec ind = t.indicators();
  out.insert(out.end(), ind.begin(), ind.end());
  out.push_back(std::log(1.0 + static_cast<double>(memory_.active_size())) /
                std::log(1.0 + TaskState::kMaxLengthScale));
  return out;
}

std::vector<SubmissionOutcome> INState::apply_action(int action_idx, bool train_pu,
                                                     const SgdConfig& pu_cfg) {
  if (action_idx < 0 || action_idx >= num_actions())
    throw std::invalid_argument("apply_action: action index out of range");
  TaskState& t = task();
  if (t.done()) throw std::logic_error("apply_action: episode already ended");

  std::vector<SubmissionOutcome> outcomes;
  const Action& a = action_space()[static_cast<std::size_t>(action_idx)];
  switch (a.kind) {
    case ActionKind::NextInput:
      node_mut(NodeId::TaskInput) = t.move_cursor(CursorDir::Next);
      break;
    case ActionKind::PrevInput:
      node_mut(NodeId::TaskInput) = t.move_cursor(CursorDir::Prev);
      break;
    case ActionKind::SelectHash:
      memory_.select_hash(node(NodeId::HashSelect));
      refresh_peeks();
      break;
    case ActionKind::AppendLeft:
      memory_.append_left(node(NodeId::AppendLeftSlot));
      refresh_peeks();
      break;
    case ActionKind::AppendRight:
      memory_.append_right(node(NodeId::AppendRightSlot));
      refresh_peeks();
      break;
    case ActionKind::PopLeft:
      memory_.pop_left();
      refresh_peeks();
      break;
    case ActionKind::PopRight:
      memory_.pop_right();
      refresh_peeks();
      break;
    case ActionKind::Copy: {
      node_mut(a.dst) = node(a.src);
      if (a.dst == NodeId::PuInput) {
        Vec out = pu_.forward(node(NodeId::PuInput), codebook_);
        node_mut(NodeId::TaskOutput) = out;
        SubmissionOutcome oc = t.submit(out);
        ++submission_count_;
        if (train_pu) pu_.train_step(node(NodeId::PuInput), oc.mse_target, pu_cfg);
        outcomes.push_back(std::move(oc));
      }
      break;
    }
  }

  if (!first_action_done_) {
    node_mut(NodeId::TaskNew) = zeros(static_cast<std::size_t>(codebook_.dim()));
    first_action_done_ = true;
  }
  last_action_ = action_idx;
  t.count_step();
  return outcomes;
}

void INState::finalize_timeout_if_needed() {
  if (task_ && !task_->done()) task_->finalize_timeout();
}

EpisodeTrace run_episode(INState& state, const ActionSelector& select, bool train_pu,
                         const SgdConfig& pu_cfg, const StepObserver& observer) {
  if (!state.has_task()) throw std::logic_error("run_episode: no task installed");
  EpisodeTrace trace;
  trace.task_length = static_cast<int>(state.task().instance().prefix.size());
  while (!state.task().done() && !state.task().budget_exhausted()) {
    TraceStep step;
    step.observation = state.observe();
    step.action = select(state, step.observation);
    step.outcomes = state.apply_action(step.action, train_pu, pu_cfg);
    if (observer) observer(state, step);
    trace.steps.push_back(std::move(step));
  }
  state.finalize_timeout_if_needed();
  trace.final_reward = state.task().final_reward();
  trace.success = trace.final_reward == 1;
  return trace;
}

}  // namespace dyckin
