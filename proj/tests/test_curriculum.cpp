#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>
#include <vector>

#include "dyckin/curriculum.hpp"

using namespace dyckin;

namespace {

std::vector<std::string> names(const std::vector<Level>& ls) {
  std::vector<std::string> out;
  for (const auto& l : ls) out.push_back(l.name());
  return out;
}

}  // namespace

TEST_CASE("default ladders walk even lengths to 10, then 100 and 1000") {
  CHECK(names(default_ladder(2, true)) ==
        std::vector<std::string>{"BM", "D2", "D4", "D6", "D8", "D10", "D100", "D1000"});
  CHECK(names(default_ladder(6, false)) ==
        std::vector<std::string>{"D6", "D8", "D10", "D100", "D1000"});
  CHECK(names(default_ladder(10, false)) == std::vector<std::string>{"D10", "D100", "D1000"});
  CHECK(names(default_ladder(11, false)) == std::vector<std::string>{"D11", "D100", "D1000"});
  CHECK(names(default_ladder(200, true)) == std::vector<std::string>{"BM", "D200", "D1000"});
  CHECK_THROWS(default_ladder(1, false));
}

TEST_CASE("the frontier advances only on a full window at the threshold") {
  CurriculumState cur({Level::dyck(2), Level::dyck(4)}, 10, 0.0, 0.95);
  Rng rng(1);
  CHECK(cur.unlocked_index() == 0);

  // Nine successes: window not full yet, no advance.
  for (int i = 0; i < 9; ++i) CHECK(!cur.record_result(Level::dyck(2), true));
  CHECK(cur.window_fill(0) == 9);
  CHECK(cur.next_level(rng) == Level::dyck(2));

  // Tenth fills the window at 100%: unlock.
  CHECK(cur.record_result(Level::dyck(2), true));
  CHECK(cur.unlocked_index() == 1);
  CHECK(cur.next_level(rng) == Level::dyck(4));

  // The last level never advances past the end.
  for (int i = 0; i < 30; ++i) CHECK(!cur.record_result(Level::dyck(4), true));
  CHECK(cur.unlocked_index() == 1);
}

TEST_CASE("one failure in a small window blocks the unlock until it ages out") {
  CurriculumState cur({Level::dyck(2), Level::dyck(4)}, 10, 0.0, 0.95);
  cur.record_result(Level::dyck(2), false);
  for (int i = 0; i < 9; ++i) CHECK(!cur.record_result(Level::dyck(2), true));
  // Window is 9/10: below 0.95.
  CHECK(cur.window_rate(0) == doctest::Approx(0.9));
  // One more success evicts the failure: 10/10.
  CHECK(cur.record_result(Level::dyck(2), true));
}

TEST_CASE("an exact-threshold window unlocks (tolerant comparison)") {
  CurriculumState cur({Level::dyck(2), Level::dyck(4)}, 20, 0.0, 0.95);
  cur.record_result(Level::dyck(2), false);
  bool advanced = false;
  for (int i = 0; i < 19; ++i) advanced = cur.record_result(Level::dyck(2), true);
  // 19/20 = 0.95 exactly.
  CHECK(cur.window_rate(0) == doctest::Approx(0.95));
  CHECK(advanced);
}

TEST_CASE("results on revisited lower levels never advance the frontier") {
  CurriculumState cur({Level::dyck(2), Level::dyck(4), Level::dyck(6)}, 5, 0.0, 0.95);
  for (int i = 0; i < 5; ++i) cur.record_result(Level::dyck(2), true);
  CHECK(cur.unlocked_index() == 1);
  // Keep feeding the old level: frontier stays at D4.
  for (int i = 0; i < 20; ++i) CHECK(!cur.record_result(Level::dyck(2), true));
  CHECK(cur.unlocked_index() == 1);
}

TEST_CASE("revisit probability controls how often unlocked levels reappear") {
  CurriculumState cur({Level::dyck(2), Level::dyck(4), Level::dyck(6)}, 5, 0.5, 0.95);
  Rng rng(77);
  for (int i = 0; i < 5; ++i) cur.record_result(Level::dyck(2), true);
  for (int i = 0; i < 5; ++i) cur.record_result(Level::dyck(4), true);
  CHECK(cur.unlocked_index() == 2);

  std::map<std::string, int> counts;
  for (int i = 0; i < 20000; ++i) ++counts[cur.next_level(rng).name()];
  // Frontier half the time; the two unlocked levels split the other half.
  CHECK(counts["D6"] == doctest::Approx(10000).epsilon(0.05));
  CHECK(counts["D2"] == doctest::Approx(5000).epsilon(0.10));
  CHECK(counts["D4"] == doctest::Approx(5000).epsilon(0.10));

  // With nothing unlocked there is nothing to revisit.
  CurriculumState fresh({Level::dyck(2), Level::dyck(4)}, 5, 1.0, 0.95);
  for (int i = 0; i < 50; ++i) CHECK(fresh.next_level(rng) == Level::dyck(2));
}

TEST_CASE("duplicate ladder entries and unknown levels are rejected") {
  CHECK_THROWS(CurriculumState({Level::dyck(2), Level::dyck(2)}, 5, 0.0, 0.95));
  CurriculumState cur({Level::dyck(2)}, 5, 0.0, 0.95);
  CHECK_THROWS(cur.record_result(Level::dyck(4), true));
  CHECK_THROWS(cur.level_index(Level::bracket_match()));
}

TEST_CASE("the oracle reproduces the scripted sequence for ( ( [") {
  SymbolCodebook cb(2, 8, 12);
  INState st(cb, ProcessingUnit::exact());
  Rng rng(5);
  st.begin_task(TaskState::begin_with_prefix(from_text("(([", 2), rng, cb));

  std::vector<std::string> expected{
      // Reset the memory under the task nonce.
      "Copy(TaskNew->HashSelect)", "SelectHash",
      // (: read, stash the opener on the right.
      "NextInput", "Copy(TaskInput->AppendRightSlot)", "AppendRight",
      // (: same.
      "NextInput", "Copy(TaskInput->AppendRightSlot)", "AppendRight",
      // [: same.
      "NextInput", "Copy(TaskInput->AppendRightSlot)", "AppendRight",
      // Terminator: emit the stashed openers innermost-first.
      "NextInput", "Copy(PeekRight->PuInput)", "PopRight", "Copy(PeekRight->PuInput)", "PopRight",
      "Copy(PeekRight->PuInput)", "PopRight",
      // Finish with the terminator itself.
      "Copy(TaskInput->PuInput)"};

  for (const auto& want : expected) {
    REQUIRE(!st.task().done());
    int a = oracle_action(st);
    CHECK(action_space()[static_cast<std::size_t>(a)].name() == want);
    st.apply_action(a, false, SgdConfig{});
  }
  CHECK(st.task().done());
  CHECK(st.task().final_reward() == 1);
  CHECK(to_text(st.task().submissions()) == "]))$");
}

TEST_CASE("the oracle rejects states its script cannot reach") {
  SymbolCodebook cb(2, 8, 12);
  INState st(cb, ProcessingUnit::exact());
  Rng rng(5);
  st.begin_task(TaskState::begin_with_prefix(from_text("()", 2), rng, cb));
  // Wander off-script: the first action should be the nonce copy, do a pop.
  st.apply_action(primitive_action_index(ActionKind::PopLeft), false, SgdConfig{});
  CHECK_THROWS_AS(oracle_action(st), OracleUndefinedError);
}

TEST_CASE("generated traces cover requested lengths and reproduce deterministically") {
  SymbolCodebook cb(2, 8, 9);
  DyckConfig cfg{2, 0.5};
  Rng rng1(31), rng2(31);
  auto a = generate_traces({2, 4}, 5, cfg, cb, rng1);
  auto b = generate_traces({2, 4}, 5, cfg, cb, rng2);
  REQUIRE(!a.empty());
  REQUIRE(a.size() == b.size());
  std::set<int> episodes;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].observation == b[i].observation);
    CHECK(a[i].action == b[i].action);
    CHECK(a[i].observation.size() == 9 * 8 + 17 + 4);
    CHECK(a[i].action >= 0);
    CHECK(a[i].action < num_actions());
    episodes.insert(a[i].episode);
  }
  CHECK(episodes.size() == 10);  // 2 lengths x 5 episodes
}

TEST_CASE("behavior cloning reaches its agreement target and can go greedy") {
  SymbolCodebook cb(2, 8, 44);
  DyckConfig cfg{2, 0.5};
  Rng trace_rng(8);
  auto traces = generate_traces({2, 4, 6}, 120, cfg, cb, trace_rng);

  Mlp policy({9 * 8 + 17 + 4, 64, 17}, HeadKind::Policy, 5);
  PretrainConfig pc;
  pc.sgd = SgdConfig{0.02, 5.0};
  // Greedy control is brittle: a policy that is merely "mostly" right keeps
  // failing the same state every episode, so clone until the holdout is clean.
  pc.agreement_target = 1.0;
  pc.epoch_cap = 200;
  pc.holdout_fraction = 0.1;
  pc.eval_chunk = 2000;
  Rng shuffle_rng(6);
  PretrainResult res = pretrain_cu(policy, traces, pc, shuffle_rng);

  CHECK(res.train_examples + res.holdout_examples == traces.size());
  CHECK(res.holdout_examples > 0);
  CHECK(res.holdout_agreement == 1.0);
  CHECK(res.reached_target);
  CHECK(res.updates_run > 0);

  // Independent agreement recount over the full data.
  std::size_t hits = 0;
  for (const auto& ex : traces) {
    Vec p = policy.policy_distribution(ex.observation);
    int arg = 0;
    for (int i = 1; i < 17; ++i)
      if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(arg)]) arg = i;
    if (arg == ex.action) ++hits;
  }
  double full_agreement = static_cast<double>(hits) / static_cast<double>(traces.size());
  CHECK(full_agreement > 0.99);
  CHECK(greedy_agreement(policy, traces) == doctest::Approx(full_agreement));

  // The cloned policy should now solve short tasks on its own.
  INState st(cb, ProcessingUnit::exact());
  Rng rng(12);
  int solved = 0;
  for (int e = 0; e < 50; ++e) {
    st.begin_task(TaskState::begin(cfg, 4, rng, cb));
    auto trace = run_episode(
        st,
        [&](const INState&, const Vec& obs) {
          Vec p = policy.policy_distribution(obs);
          int arg = 0;
          for (int i = 1; i < 17; ++i)
            if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(arg)]) arg = i;
          return arg;
        },
        false, SgdConfig{});
    solved += trace.success ? 1 : 0;
    st.drop_inactive_memory();
  }
  CHECK(solved >= 45);
}

TEST_CASE("pretraining rejects unusable inputs") {
  Mlp policy({5, 4}, HeadKind::Policy, 1);
  PretrainConfig pc;
  Rng rng(1);
  CHECK_THROWS(pretrain_cu(policy, {}, pc, rng));
}
