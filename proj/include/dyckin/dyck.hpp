#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dyckin/common.hpp"

namespace dyckin {

// Generalized bracket language over n distinct bracket types. A word is
// balanced when every opener is closed by its own closer in properly nested
// order. Tasks are built from a random valid prefix; the unique shortest
// completion closes the still-open brackets innermost-first and ends with the
// terminator symbol.
struct DyckConfig {
  int num_bracket_types = 2;       // n, in [1, 26]
  double close_probability = 0.5;  // chance of closing the last open bracket when one exists
};

enum class SymbolKind : std::uint8_t { Open, Close, Terminator };

struct BracketSymbol {
  SymbolKind kind = SymbolKind::Terminator;
  int type_index = 0;  // always 0 for the terminator

  static BracketSymbol open(int type) { return {SymbolKind::Open, type}; }
  static BracketSymbol close(int type) { return {SymbolKind::Close, type}; }
  static BracketSymbol terminator() { return {SymbolKind::Terminator, 0}; }

  bool is_open() const { return kind == SymbolKind::Open; }
  bool is_close() const { return kind == SymbolKind::Close; }
  bool is_terminator() const { return kind == SymbolKind::Terminator; }

  bool operator==(const BracketSymbol&) const = default;
};

// Stable ordering: openers by type, then closers by type, then the terminator.
int symbol_ordinal(const BracketSymbol& s, int num_bracket_types);

// Random valid prefix of exactly `length` brackets (no terminator). At each
// position: if the stack is non-empty, the last open bracket is closed with
// probability close_probability; otherwise a uniformly random type is opened.
std::vector<BracketSymbol> generate_prefix(const DyckConfig& cfg, int length, Rng& rng);

// Unique shortest completion of a valid prefix: closers for the still-open
// brackets in reverse stack order, then the terminator.
std::vector<BracketSymbol> required_completion(std::span<const BracketSymbol> prefix);

// True when no closer ever mismatches or underflows. Throws std::invalid_argument
// if the sequence contains a terminator.
bool is_valid_prefix(std::span<const BracketSymbol> seq);

// True when the sequence is a valid prefix with no brackets left open.
bool is_balanced(std::span<const BracketSymbol> seq);

// Text rendering: types 0..3 map to ()/[]/{}/<>, higher types to letter pairs
// (uppercase opens, lowercase closes), and the terminator to '$'.
char symbol_char(const BracketSymbol& s);
std::string to_text(std::span<const BracketSymbol> seq);
std::vector<BracketSymbol> from_text(std::string_view text, int num_bracket_types);

// Random codes in [-1, 1]^dim for the 2n+1 symbols. The whole set is resampled
// until the minimum pairwise distance is at least kMinCodeDistance, so nearest-
// code decoding tolerates perturbations up to half that distance.
class SymbolCodebook {
 public:
  static constexpr double kMinCodeDistance = 0.5;

  SymbolCodebook(int num_bracket_types, int dim, std::uint64_t seed);

  const Vec& code(const BracketSymbol& s) const;
  Vec encode(const BracketSymbol& s) const { return code(s); }

  // Nearest code by Euclidean distance; ties break toward the lowest ordinal.
  BracketSymbol decode(const Vec& v) const;
  // Nearest code if within max_distance, otherwise nullopt.
  std::optional<BracketSymbol> try_decode(const Vec& v, double max_distance) const;

  double min_pairwise_distance() const { return min_pairwise_; }
  double decode_margin() const { return min_pairwise_ / 2.0; }
  int dim() const { return dim_; }
  int num_bracket_types() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<BracketSymbol>& symbols() const { return symbols_; }

  bool operator==(const SymbolCodebook&) const = default;

 private:
  int n_ = 0;
  int dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<BracketSymbol> symbols_;
  std::vector<Vec> codes_;
  double min_pairwise_ = 0.0;
};

}  // namespace dyckin
