#include "dyckin/dyck.hpp"

#include <limits>
#include <stdexcept>

namespace dyckin {

namespace {

void check_config(const DyckConfig& cfg) {
  if (cfg.num_bracket_types < 1 || cfg.num_bracket_types > 26)
    throw std::invalid_argument("num_bracket_types must be in [1, 26]");
  if (!(cfg.close_probability >= 0.0 && cfg.close_probability <= 1.0))
    throw std::invalid_argument("close_probability must be in [0, 1]");
}

}  // namespace

int symbol_ordinal(const BracketSymbol& s, int num_bracket_types) {
  switch (s.kind) {
    case SymbolKind::Open:
      return s.type_index;
    case SymbolKind::Close:
      return num_bracket_types + s.type_index;
    case SymbolKind::Terminator:
      return 2 * num_bracket_types;
  }
  throw std::invalid_argument("symbol_ordinal: bad kind");
}

std::vector<BracketSymbol> generate_prefix(const DyckConfig& cfg, int length, Rng& rng) {
  check_config(cfg);
  if (length < 0) throw std::invalid_argument("generate_prefix: length must be non-negative");
  std::vector<BracketSymbol> out;
  out.reserve(static_cast<std::size_t>(length));
  std::vector<int> stack;
  for (int i = 0; i < length; ++i) {
    if (!stack.empty() && uniform01(rng) < cfg.close_probability) {
      out.push_back(BracketSymbol::close(stack.back()));
      stack.pop_back();
    } else {
      int t = uniform_int(rng, cfg.num_bracket_types);
      out.push_back(BracketSymbol::open(t));
      stack.push_back(t);
    }
  }
  return out;
}

std::vector<BracketSymbol> required_completion(std::span<const BracketSymbol> prefix) {
  std::vector<int> stack;
  for (const auto& s : prefix) {
    if (s.is_terminator())
      throw std::invalid_argument("required_completion: terminator inside prefix");
    if (s.is_open()) {
      stack.push_back(s.type_index);
    } else {
      if (stack.empty() || stack.back() != s.type_index)
        throw std::invalid_argument("required_completion: prefix is not a valid prefix");
      stack.pop_back();
    }
  }
  std::vector<BracketSymbol> out;
  out.reserve(stack.size() + 1);
  for (auto it = stack.rbegin(); it != stack.rend(); ++it)
    out.push_back(BracketSymbol::close(*it));
  out.push_back(BracketSymbol::terminator());
  return out;
}

namespace {

// Shared stack walk; returns the open count, or -1 on a mismatch/underflow.
int open_depth_after(std::span<const BracketSymbol> seq) {
  std::vector<int> stack;
  for (const auto& s : seq) {
    if (s.is_terminator())
      throw std::invalid_argument("terminator inside bracket sequence");
    if (s.is_open()) {
      stack.push_back(s.type_index);
    } else {
      if (stack.empty() || stack.back() != s.type_index) return -1;
      stack.pop_back();
    }
  }
  return static_cast<int>(stack.size());
}

}  // namespace

bool is_valid_prefix(std::span<const BracketSymbol> seq) { return open_depth_after(seq) >= 0; }

bool is_balanced(std::span<const BracketSymbol> seq) { return open_depth_after(seq) == 0; }

char symbol_char(const BracketSymbol& s) {
  static constexpr char kOpens[] = "([{<";
  static constexpr char kCloses[] = ")]}>";
  if (s.is_terminator()) return '$';
  int t = s.type_index;
  if (t < 0 || t >= 26) throw std::invalid_argument("symbol_char: type out of range");
  if (t < 4) return s.is_open() ? kOpens[t] : kCloses[t];
  return static_cast<char>((s.is_open() ? 'A' : 'a') + t);
}

std::string to_text(std::span<const BracketSymbol> seq) {
  std::string out;
  out.reserve(seq.size());
  for (const auto& s : seq) out.push_back(symbol_char(s));
  return out;
}

std::vector<BracketSymbol> from_text(std::string_view text, int num_bracket_types) {
  std::vector<BracketSymbol> out;
  out.reserve(text.size());
  for (char c : text) {
    BracketSymbol s;
    if (c == '$') {
      s = BracketSymbol::terminator();
    } else {
      static constexpr std::string_view kOpens = "([{<";
      static constexpr std::string_view kCloses = ")]}>";
      if (auto pos = kOpens.find(c); pos != std::string_view::npos)
        s = BracketSymbol::open(static_cast<int>(pos));
      else if (auto cpos = kCloses.find(c); cpos != std::string_view::npos)
        s = BracketSymbol::close(static_cast<int>(cpos));
      else if (c >= 'E' && c <= 'Z')
        s = BracketSymbol::open(c - 'A');
      else if (c >= 'e' && c <= 'z')
        s = BracketSymbol::close(c - 'a');
      else
        throw std::invalid_argument(std::string("from_text: unknown symbol '") + c + "'");
    }
    if (!s.is_terminator() && s.type_index >= num_bracket_types)
      throw std::invalid_argument(std::string("from_text: symbol '") + c +
                                  "' outside configured bracket types");
    out.push_back(s);
  }
  return out;
}

SymbolCodebook::SymbolCodebook(int num_bracket_types, int dim, std::uint64_t seed)
    : n_(num_bracket_types), dim_(dim), seed_(seed) {
  if (n_ < 1 || n_ > 26) throw std::invalid_argument("SymbolCodebook: num_bracket_types in [1, 26]");
  if (dim_ < 1) throw std::invalid_argument("SymbolCodebook: dim must be positive");

  for (int t = 0; t < n_; ++t) symbols_.push_back(BracketSymbol::open(t));
  for (int t = 0; t < n_; ++t) symbols_.push_back(BracketSymbol::close(t));
  symbols_.push_back(BracketSymbol::terminator());

  Rng rng(seed);
  constexpr int kMaxAttempts = 10000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    codes_.assign(symbols_.size(), Vec(static_cast<std::size_t>(dim_)));
    for (auto& c : codes_)
      for (auto& x : c) x = uniform_range(rng, -1.0, 1.0);
    double min_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < codes_.size(); ++i)
      for (std::size_t j = i + 1; j < codes_.size(); ++j)
        min_d = std::min(min_d, l2_distance(codes_[i], codes_[j]));
    if (codes_.size() < 2) min_d = std::numeric_limits<double>::infinity();
    if (min_d >= kMinCodeDistance) {
      min_pairwise_ = min_d;
      return;
    }
  }
  throw std::invalid_argument(
      "SymbolCodebook: could not satisfy the minimum pairwise code distance; "
      "increase dim or reduce num_bracket_types");
}

const Vec& SymbolCodebook::code(const BracketSymbol& s) const {
  return codes_[static_cast<std::size_t>(symbol_ordinal(s, n_))];
}

BracketSymbol SymbolCodebook::decode(const Vec& v) const {
  if (static_cast<int>(v.size()) != dim_)
    throw std::invalid_argument("SymbolCodebook::decode: dimension mismatch");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    double d = l2_distance(v, codes_[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return symbols_[best];
}

std::optional<BracketSymbol> SymbolCodebook::try_decode(const Vec& v, double max_distance) const {
  if (static_cast<int>(v.size()) != dim_)
    throw std::invalid_argument("SymbolCodebook::try_decode: dimension mismatch");
  BracketSymbol s = decode(v);
  if (l2_distance(v, code(s)) <= max_distance) return s;
  return std::nullopt;
}

}  // namespace dyckin
