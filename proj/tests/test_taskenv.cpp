#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "dyckin/taskenv.hpp"

using namespace dyckin;

namespace {

const SymbolCodebook& shared_codebook() {
  static SymbolCodebook cb(2, 8, 99);
  return cb;
}

TaskState make_task(const std::string& prefix_text) {
  Rng rng(7);
  return TaskState::begin_with_prefix(from_text(prefix_text, 2), rng, shared_codebook());
}

}  // namespace

TEST_CASE("instances pair the prefix with its required completion") {
  Rng rng(3);
  DyckConfig cfg{2, 0.5};
  for (int rep = 0; rep < 200; ++rep) {
    auto t = TaskState::begin(cfg, 10, rng, shared_codebook());
    const TaskInstance& inst = t.instance();
    CHECK(inst.prefix.size() == 10);
    CHECK(inst.target == required_completion(inst.prefix));
    REQUIRE(inst.input_with_terminator.size() == 11);
    CHECK(inst.input_with_terminator.back().is_terminator());
    for (std::size_t i = 0; i < 10; ++i) CHECK(inst.input_with_terminator[i] == inst.prefix[i]);
    CHECK(t.step_budget() ==
          TaskState::kBudgetFactor * static_cast<int>(inst.prefix.size() + inst.target.size()));
  }
}

TEST_CASE("the cursor starts unset and the first move delivers position 0") {
  auto t = make_task("(([[");
  const auto& cb = shared_codebook();
  CHECK(t.cursor() == 0);

  // First Next lands on position 0, not position 1.
  CHECK(t.move_cursor(CursorDir::Next) == cb.code(from_text("(", 2)[0]));
  CHECK(t.cursor() == 0);
  CHECK(t.move_cursor(CursorDir::Next) == cb.code(from_text("(", 2)[0]));
  CHECK(t.cursor() == 1);
  CHECK(t.move_cursor(CursorDir::Next) == cb.code(from_text("[", 2)[0]));
  CHECK(t.move_cursor(CursorDir::Next) == cb.code(from_text("[", 2)[0]));
  CHECK(t.cursor() == 3);

  // Clamped at the terminator.
  CHECK(t.move_cursor(CursorDir::Next) == cb.code(BracketSymbol::terminator()));
  CHECK(t.cursor() == 4);
  CHECK(t.cursor_at_terminator());
  CHECK(t.move_cursor(CursorDir::Next) == cb.code(BracketSymbol::terminator()));
  CHECK(t.cursor() == 4);

  // And clamped at zero going backwards.
  for (int i = 0; i < 10; ++i) t.move_cursor(CursorDir::Prev);
  CHECK(t.cursor() == 0);
  CHECK(t.move_cursor(CursorDir::Prev) == cb.code(from_text("(", 2)[0]));
}

TEST_CASE("a walk over the whole input returns every symbol's code") {
  Rng rng(11);
  DyckConfig cfg{2, 0.5};
  auto t = TaskState::begin(cfg, 25, rng, shared_codebook());
  const auto& input = t.instance().input_with_terminator;
  for (std::size_t i = 0; i < input.size(); ++i) {
    Vec got = t.move_cursor(CursorDir::Next);
    CHECK(got == shared_codebook().code(input[i]));
    CHECK(t.cursor() == static_cast<int>(i));
  }
}

TEST_CASE("submitting the exact target ends the episode with reward 1") {
  auto t = make_task("(([[");
  const auto& cb = shared_codebook();
  auto target = t.instance().target;  // ]])){terminator}
  REQUIRE(target.size() == 5);
  for (std::size_t i = 0; i < target.size(); ++i) {
    CHECK(!t.done());
    auto out = t.submit(cb.code(target[i]));
    CHECK(out.decoded == target[i]);
    CHECK(out.expected == target[i]);
    CHECK(out.matched);
    CHECK(out.mse_target == cb.code(target[i]));
    if (i + 1 < target.size()) {
      CHECK(!out.episode_done);
      CHECK(!out.final_reward.has_value());
    } else {
      CHECK(out.episode_done);
      REQUIRE(out.final_reward.has_value());
      CHECK(*out.final_reward == 1);
    }
  }
  CHECK(t.done());
  CHECK(t.final_reward() == 1);
  CHECK(t.submissions() == target);
}

TEST_CASE("one wrong submission spoils the reward but the episode runs on") {
  auto t = make_task("((");
  const auto& cb = shared_codebook();
  // Expected ) ) $ — submit ] first instead.
  auto out = t.submit(cb.code(from_text("]", 2)[0]));
  CHECK(!out.matched);
  CHECK(out.expected == from_text(")", 2)[0]);
  CHECK(!out.episode_done);
  CHECK(t.mismatch());

  t.submit(cb.code(from_text(")", 2)[0]));
  auto last = t.submit(cb.code(BracketSymbol::terminator()));
  CHECK(last.episode_done);
  CHECK(*last.final_reward == 0);
  CHECK(t.final_reward() == 0);
}

TEST_CASE("submissions beyond the target length end the episode with reward 0") {
  auto t = make_task("()");  // target is just the terminator
  const auto& cb = shared_codebook();
  auto out = t.submit(cb.code(from_text(")", 2)[0]));  // wrong and not terminal
  CHECK(!out.matched);
  CHECK(!out.episode_done);
  // Now the ledger is longer than the target: expected falls back to the
  // terminator and the episode ends unsuccessfully.
  auto out2 = t.submit(cb.code(from_text(")", 2)[0]));
  CHECK(out2.expected == BracketSymbol::terminator());
  CHECK(out2.episode_done);
  CHECK(*out2.final_reward == 0);
}

TEST_CASE("a noisy but in-margin submission decodes to the nearest symbol") {
  auto t = make_task("(");
  const auto& cb = shared_codebook();
  Vec v = cb.code(from_text(")", 2)[0]);
  v[0] += cb.decode_margin() * 0.5;
  auto out = t.submit(v);
  CHECK(out.decoded == from_text(")", 2)[0]);
  CHECK(out.matched);
}

TEST_CASE("indicators expose cursor ratio, scaled length, and budget use") {
  auto t = make_task("(([[");
  Vec ind = t.indicators();
  REQUIRE(ind.size() == 3);
  CHECK(ind[0] == 0.0);                // cursor at 0 of 4
  CHECK(ind[1] == doctest::Approx(4.0 / TaskState::kMaxLengthScale));
  CHECK(ind[2] == 0.0);                // no steps counted yet

  t.move_cursor(CursorDir::Next);
  t.move_cursor(CursorDir::Next);
  t.move_cursor(CursorDir::Next);  // cursor at 2
  CHECK(t.indicators()[0] == doctest::Approx(2.0 / 4.0));

  t.count_step();
  t.count_step();
  CHECK(t.indicators()[2] == doctest::Approx(2.0 / t.step_budget()));
}

TEST_CASE("an empty prefix pins the cursor indicator to the terminator") {
  Rng rng(5);
  auto t = TaskState::begin_with_prefix({}, rng, shared_codebook());
  CHECK(t.instance().prefix.empty());
  CHECK(t.instance().target == std::vector<BracketSymbol>{BracketSymbol::terminator()});
  CHECK(t.indicators()[0] == 1.0);
  // Submitting the terminator immediately wins.
  auto out = t.submit(shared_codebook().code(BracketSymbol::terminator()));
  CHECK(out.episode_done);
  CHECK(*out.final_reward == 1);
}

TEST_CASE("the nonce is fresh, in range, and consumed by restarts") {
  Rng rng(31);
  DyckConfig cfg{2, 0.5};
  auto a = TaskState::begin(cfg, 5, rng, shared_codebook());
  auto b = TaskState::begin(cfg, 5, rng, shared_codebook());
  CHECK(a.nonce().size() == 8);
  CHECK(a.nonce() != b.nonce());
  CHECK(!is_zero(a.nonce()));
  for (double x : a.nonce()) {
    CHECK(x >= -1.0);
    CHECK(x <= 1.0);
  }
}

TEST_CASE("timeout finalization closes an unfinished episode with reward 0") {
  auto t = make_task("((");
  for (int i = 0; i < t.step_budget(); ++i) t.count_step();
  CHECK(t.budget_exhausted());
  CHECK(!t.done());
  t.finalize_timeout();
  CHECK(t.done());
  CHECK(t.final_reward() == 0);
}

TEST_CASE("submissions after the episode ended are rejected") {
  auto t = make_task("");
  t.submit(shared_codebook().code(BracketSymbol::terminator()));
  CHECK(t.done());
  CHECK_THROWS(t.submit(shared_codebook().code(BracketSymbol::terminator())));
}

TEST_CASE("codebook bracket-type mismatch is rejected") {
  Rng rng(1);
  DyckConfig five{5, 0.5};
  CHECK_THROWS(TaskState::begin(five, 4, rng, shared_codebook()));
}
