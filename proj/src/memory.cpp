#include "dyckin/memory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace dyckin {

HashDequeMemory::HashDequeMemory(int dim) : dim_(dim), sentinel_(zeros(static_cast<std::size_t>(dim))) {
  if (dim < 1) throw std::invalid_argument("HashDequeMemory: dim must be positive");
}

void HashDequeMemory::check_vec(const Vec& v) const {
  if (static_cast<int>(v.size()) != dim_)
    throw std::invalid_argument("HashDequeMemory: dimension mismatch");
  if (!all_finite(v)) throw std::invalid_argument("HashDequeMemory: non-finite vector");
}

std::string HashDequeMemory::quantize_key(const Vec& selector) {
  std::string key;
  key.reserve(selector.size() * 8);
  for (double x : selector) {
    double scaled = x * 1e6;
    // Guard llround against values outside the representable range.
    scaled = std::clamp(scaled, -9.0e18, 9.0e18);
    auto q = static_cast<std::int64_t>(std::llround(scaled));
    auto u = static_cast<std::uint64_t>(q);
    for (int b = 0; b < 8; ++b) key.push_back(static_cast<char>((u >> (8 * b)) & 0xff));
  }
  return key;
}

void HashDequeMemory::select_hash(const Vec& selector) {
  check_vec(selector);
  std::string key = quantize_key(selector);
  auto [it, inserted] = store_.try_emplace(std::move(key));
  active_ = &it->second;
  active_key_ = it->first;
}

void HashDequeMemory::append_left(const Vec& v) {
  check_vec(v);
  if (!active_) throw NoActiveMemoryError();
  active_->push_front(v);
}

void HashDequeMemory::append_right(const Vec& v) {
  check_vec(v);
  if (!active_) throw NoActiveMemoryError();
  active_->push_back(v);
}

Vec HashDequeMemory::pop_left() {
  if (!active_) throw NoActiveMemoryError();
  if (active_->empty()) return sentinel_;
  Vec v = std::move(active_->front());
  active_->pop_front();
  return v;
}

Vec HashDequeMemory::pop_right() {
  if (!active_) throw NoActiveMemoryError();
  if (active_->empty()) return sentinel_;
  Vec v = std::move(active_->back());
  active_->pop_back();
  return v;
}

const Vec& HashDequeMemory::peek_left() const {
  if (!active_ || active_->empty()) return sentinel_;
  return active_->front();
}

const Vec& HashDequeMemory::peek_right() const {
  if (!active_ || active_->empty()) return sentinel_;
  return active_->back();
}

std::size_t HashDequeMemory::active_size() const {
  if (!active_) throw NoActiveMemoryError();
  return active_->size();
}

void HashDequeMemory::drop_inactive() {
  for (auto it = store_.begin(); it != store_.end();) {
    if (&it->second != active_)
      it = store_.erase(it);
    else
      ++it;
  }
}

std::string HashDequeMemory::debug_dump(const SymbolCodebook* codebook) const {
  auto hex_key = [](const std::string& key) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    std::size_t n = std::min<std::size_t>(key.size(), 8);
    for (std::size_t i = 0; i < n; ++i) {
      auto byte = static_cast<unsigned char>(key[i]);
      out.push_back(digits[byte >> 4]);
      out.push_back(digits[byte & 0xf]);
    }
    if (key.size() > n) out += "..";
    return out;
  };
  auto render = [&](const Vec& v) -> std::string {
    if (is_zero(v)) return ".";
    if (codebook) {
      if (auto s = codebook->try_decode(v, codebook->decode_margin()))
        return std::string(1, symbol_char(*s));
    }
    return "?";
  };
  // Sort keys so the dump is deterministic regardless of hash-table order.
  std::map<std::string, const std::deque<Vec>*> sorted;
  for (const auto& [key, deq] : store_) sorted.emplace(key, &deq);
  std::ostringstream os;
  for (const auto& [key, deq] : sorted) {
    os << "key=" << hex_key(key) << (key == active_key_ && active_ ? "*" : "") << " len=" << deq->size();
    if (!deq->empty()) os << " first=" << render(deq->front()) << " last=" << render(deq->back());
    os << "\n";
  }
  return os.str();
}

}  // namespace dyckin
