#pragma once

#include <bitset>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace grammine {

/// Regular pattern restricted to a concatenation of byte classes, each with an
/// optional `?`, `*` or `+` quantifier. This covers every predefined token
/// class and keeps matching and sampling linear.
class CharClassPattern {
 public:
  enum class Quantifier { One, Optional, Star, Plus };

  struct Atom {
    std::bitset<256> bytes;
    Quantifier quantifier = Quantifier::One;
  };

  CharClassPattern() = default;
  /// Parses `[a-z0-9]+`, `-?[1-9][0-9]*`, `\/[A-Z]*` and similar.
  static CharClassPattern parse(std::string_view source);

  const std::string& source() const { return source_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  bool matches(std::string_view text) const;
  /// All `e` such that `text[start, e)` matches, in increasing order.
  std::vector<std::size_t> match_ends(std::string_view text, std::size_t start) const;
  std::size_t min_length() const;
  /// Random member; repetitions continue with probability 1/2.
  std::string sample(std::mt19937_64& rng, bool shortest = false) const;

 private:
  std::string source_;
  std::vector<Atom> atoms_;
};

class UnknownClass : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TokenClass {
  std::string name;
  CharClassPattern pattern;
  std::vector<std::string> probes;
};

/// User-configurable DAG of regular token classes ordered by language inclusion.
class TokenLattice {
 public:
  TokenLattice() = default;

  /// The predefined lattice (DIGITS, HOSTNAME, ALPHANUMWITHSPECIALS, ...).
  static const TokenLattice& standard();
  static TokenLattice parse(std::string_view config);
  std::string to_config() const;

  void add_class(TokenClass cls);
  void add_edge(const std::string& smaller, const std::string& larger);

  bool has(std::string_view name) const { return classes_.count(std::string(name)) != 0; }
  const TokenClass& get(std::string_view name) const;
  const std::map<std::string, TokenClass>& classes() const { return classes_; }
  const std::vector<std::pair<std::string, std::string>>& edges() const { return edges_; }

  /// Direct supersets of `name`, sorted by name.
  std::vector<std::string> successors(std::string_view name) const;
  std::vector<std::string> predecessors(std::string_view name) const;

  /// A class accepting every string such that no predecessor does.
  /// Ties between unrelated minimal classes go to the one with the most
  /// transitive supersets, then by name.
  std::optional<std::string> smallest_containing(const std::vector<std::string>& strings) const;

  /// Violations of: probes match their own class; every edge's smaller-class
  /// probes match the larger class; the edge relation is acyclic.
  std::vector<std::string> check() const;

 private:
  std::map<std::string, TokenClass> classes_;
  std::vector<std::pair<std::string, std::string>> edges_;
};

}  // namespace grammine
