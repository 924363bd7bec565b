#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "dyckin/memory.hpp"

using namespace dyckin;

namespace {

// Reference model: a plain map of deques keyed by the same quantization rule,
// written independently of the library implementation.
struct RefMemory {
  int dim;
  std::map<std::string, std::deque<Vec>> store;
  std::string active;
  bool has_active = false;
  Vec sentinel;

  explicit RefMemory(int d) : dim(d), sentinel(static_cast<std::size_t>(d), 0.0) {}

  static std::string key_of(const Vec& v) {
    std::string k;
    for (double x : v) {
      auto q = static_cast<long long>(std::llround(x * 1e6));
      for (int b = 0; b < 8; ++b) k.push_back(static_cast<char>((q >> (8 * b)) & 0xff));
    }
    return k;
  }

  void select(const Vec& v) {
    active = key_of(v);
    has_active = true;
    store[active];  // materialize empty deque
  }
  std::deque<Vec>& deque_() { return store[active]; }
  void append_left(const Vec& v) { deque_().push_front(v); }
  void append_right(const Vec& v) { deque_().push_back(v); }
  Vec pop_left() {
    auto& d = deque_();
    if (d.empty()) return sentinel;
    Vec v = d.front();
    d.pop_front();
    return v;
  }
  Vec pop_right() {
    auto& d = deque_();
    if (d.empty()) return sentinel;
    Vec v = d.back();
    d.pop_back();
    return v;
  }
  Vec peek_left() { return deque_().empty() ? sentinel : deque_().front(); }
  Vec peek_right() { return deque_().empty() ? sentinel : deque_().back(); }
  std::size_t size() { return deque_().size(); }
};

}  // namespace

TEST_CASE("quantize_key is stable, length-correct, and resolution-correct") {
  Vec a{0.5, -0.25, 0.0, 1.0};
  CHECK(HashDequeMemory::quantize_key(a) == HashDequeMemory::quantize_key(a));
  CHECK(HashDequeMemory::quantize_key(a).size() == 8 * 4);

  Vec nearly = a;
  nearly[0] += 2e-7;  // below the 1e-6 resolution
  CHECK(HashDequeMemory::quantize_key(nearly) == HashDequeMemory::quantize_key(a));

  Vec apart = a;
  apart[0] += 2e-6;  // above the resolution
  CHECK(HashDequeMemory::quantize_key(apart) != HashDequeMemory::quantize_key(a));
}

TEST_CASE("operations before any selection throw, selection makes them legal") {
  HashDequeMemory mem(3);
  CHECK(!mem.has_active());
  CHECK_THROWS_AS(mem.append_left({1, 2, 3}), NoActiveMemoryError);
  CHECK_THROWS_AS(mem.pop_right(), NoActiveMemoryError);
  CHECK_THROWS_AS(mem.active_size(), NoActiveMemoryError);
  // Peeks are safe: they surface the sentinel.
  CHECK(mem.peek_left() == Vec{0, 0, 0});

  mem.select_hash({1, 2, 3});
  CHECK(mem.has_active());
  CHECK(mem.active_size() == 0);
  CHECK(mem.pop_left() == Vec{0, 0, 0});  // empty pop yields the sentinel
}

TEST_CASE("selecting a fresh key acts as a reset; old keys keep their content") {
  HashDequeMemory mem(2);
  mem.select_hash({1.0, 0.0});
  mem.append_right({5.0, 5.0});
  mem.append_right({6.0, 6.0});
  CHECK(mem.active_size() == 2);

  mem.select_hash({2.0, 0.0});  // never used: empty view
  CHECK(mem.active_size() == 0);
  CHECK(mem.peek_right() == Vec{0.0, 0.0});
  mem.append_left({7.0, 7.0});

  mem.select_hash({1.0, 0.0});  // back to the first deque, fully preserved
  CHECK(mem.active_size() == 2);
  CHECK(mem.peek_left() == Vec{5.0, 5.0});
  CHECK(mem.peek_right() == Vec{6.0, 6.0});
  CHECK(mem.key_count() == 2);
}

TEST_CASE("drop_inactive keeps only the active deque") {
  HashDequeMemory mem(1);
  mem.select_hash({1.0});
  mem.append_right({1.0});
  mem.select_hash({2.0});
  mem.append_right({2.0});
  mem.select_hash({3.0});
  CHECK(mem.key_count() == 3);
  mem.drop_inactive();
  CHECK(mem.key_count() == 1);
  CHECK(mem.active_size() == 0);
  // The survivor is the active one; reselecting an evicted key gives empty.
  mem.select_hash({1.0});
  CHECK(mem.active_size() == 0);
}

TEST_CASE("100k random operations match the reference model exactly") {
  const int dim = 4;
  HashDequeMemory mem(dim);
  RefMemory ref(dim);
  Rng rng(20250822);

  // A small pool of selectors and payloads so collisions and revisits happen.
  std::vector<Vec> selectors, payloads;
  for (int i = 0; i < 12; ++i) {
    Vec s(dim), p(dim);
    for (double& x : s) x = uniform_range(rng, -1, 1);
    for (double& x : p) x = uniform_range(rng, -1, 1);
    selectors.push_back(s);
    payloads.push_back(p);
  }
  mem.select_hash(selectors[0]);
  ref.select(selectors[0]);

  for (int op = 0; op < 100000; ++op) {
    switch (uniform_int(rng, 7)) {
      case 0: {
        const Vec& s = selectors[static_cast<std::size_t>(uniform_int(rng, 12))];
        mem.select_hash(s);
        ref.select(s);
        break;
      }
      case 1: {
        const Vec& p = payloads[static_cast<std::size_t>(uniform_int(rng, 12))];
        mem.append_left(p);
        ref.append_left(p);
        break;
      }
      case 2: {
        const Vec& p = payloads[static_cast<std::size_t>(uniform_int(rng, 12))];
        mem.append_right(p);
        ref.append_right(p);
        break;
      }
      case 3:
        REQUIRE(mem.pop_left() == ref.pop_left());
        break;
      case 4:
        REQUIRE(mem.pop_right() == ref.pop_right());
        break;
      case 5:
        REQUIRE(mem.peek_left() == ref.peek_left());
        REQUIRE(mem.peek_right() == ref.peek_right());
        break;
      case 6:
        REQUIRE(mem.active_size() == ref.size());
        break;
    }
  }
  // Final full sweep over every selector.
  for (const auto& s : selectors) {
    mem.select_hash(s);
    ref.select(s);
    REQUIRE(mem.active_size() == ref.size());
    while (ref.size() > 0) REQUIRE(mem.pop_left() == ref.pop_left());
    REQUIRE(mem.pop_left() == ref.pop_left());
  }
}

TEST_CASE("deque content survives heavy key churn in the same table") {
  // Thousands of new keys force the hash table to rehash repeatedly; content
  // stored under the first key must come back untouched.
  HashDequeMemory mem(1);
  mem.select_hash({0.0});
  for (int i = 0; i < 64; ++i) mem.append_right({static_cast<double>(i)});
  for (int i = 1; i <= 5000; ++i) {
    mem.select_hash({static_cast<double>(i)});
    mem.append_right({static_cast<double>(-i)});
    CHECK(mem.peek_left() == Vec{static_cast<double>(-i)});
  }
  CHECK(mem.key_count() == 5001);
  mem.select_hash({0.0});
  CHECK(mem.active_size() == 64);
  CHECK(mem.peek_left() == Vec{0.0});
  CHECK(mem.peek_right() == Vec{63.0});
}

TEST_CASE("dimension mismatches are rejected") {
  HashDequeMemory mem(3);
  CHECK_THROWS(mem.select_hash({1.0}));
  mem.select_hash({1.0, 2.0, 3.0});
  CHECK_THROWS(mem.append_left({1.0}));
}

TEST_CASE("debug_dump lists keys with sizes and marks the active deque") {
  HashDequeMemory mem(2);
  mem.select_hash({1.0, 1.0});
  mem.append_right({0.5, 0.5});
  std::string dump = mem.debug_dump();
  CHECK(dump.find('*') != std::string::npos);
  CHECK(dump.find("1") != std::string::npos);
}
