#pragma once

#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "dyckin/common.hpp"
#include "dyckin/dyck.hpp"

namespace dyckin {

struct NoActiveMemoryError : std::runtime_error {
  NoActiveMemoryError() : std::runtime_error("no active deque selected") {}
};

// Hash table of double-ended queues of vectors. A selector vector is quantized
// into a key; exactly one deque is active at a time and all append/pop/peek
// traffic goes to it. Selecting a never-used key yields an empty deque, which
// acts as a memory reset without destroying other deques; re-selecting an old
// key restores its full content.
class HashDequeMemory {
 public:
  explicit HashDequeMemory(int dim);

  // Component-wise quantization to six decimal places, serialized to a byte
  // string. Equal vectors always map to the same key.
  static std::string quantize_key(const Vec& selector);

  void select_hash(const Vec& selector);

  void append_left(const Vec& v);
  void append_right(const Vec& v);

  // Popping an empty active deque returns the all-zeros sentinel.
  Vec pop_left();
  Vec pop_right();

  // Sentinel when nothing is selected or the active deque is empty.
  const Vec& peek_left() const;
  const Vec& peek_right() const;

  std::size_t active_size() const;
  bool has_active() const { return active_ != nullptr; }
  std::size_t key_count() const { return store_.size(); }
  const Vec& sentinel() const { return sentinel_; }
  int dim() const { return dim_; }

  // Drops every deque except the active one. Housekeeping between episodes;
  // not part of the action-level interface.
  void drop_inactive();

  // One line per key (sorted): deque length plus decoded first/last elements.
  std::string debug_dump(const SymbolCodebook* codebook = nullptr) const;

 private:
  void check_vec(const Vec& v) const;

  int dim_;
  Vec sentinel_;
  std::unordered_map<std::string, std::deque<Vec>> store_;
  std::deque<Vec>* active_ = nullptr;
  std::string active_key_;
};

}  // namespace dyckin
