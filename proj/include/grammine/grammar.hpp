#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "grammine/lattice.hpp"

namespace grammine {

struct Element {
  enum class Kind { Terminal, NtRef, TokenRef, Optional, Repeat };

  Kind kind = Kind::Terminal;
  std::string text;  // bytes of a Terminal, class name of a TokenRef
  int nt = -1;       // target of an NtRef
  std::vector<Element> body;
  int min = 0;  // Repeat only: 0 for `*`, 1 for `+`

  static Element terminal(std::string bytes);
  static Element ref(int nt);
  static Element token(std::string cls);
  static Element optional(std::vector<Element> body);
  static Element repeat(std::vector<Element> body, int min);

  bool operator==(const Element&) const = default;
};

using Alternative = std::vector<Element>;

struct Rule {
  std::string name;
  std::vector<Alternative> alternatives;
};

class GrammarError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonProductiveGrammar : public GrammarError {
 public:
  using GrammarError::GrammarError;
};

class SyntaxError : public GrammarError {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line;
  std::size_t column;
};

/// Context-free grammar over bytes with EBNF-style optionals and repetitions.
/// Nonterminals are identified by integer ids; names are for display.
class Grammar {
 public:
  int start = -1;
  std::map<int, Rule> rules;

  int add_rule(std::string name, std::vector<Alternative> alternatives = {});
  Rule& rule(int id);
  const Rule& rule(int id) const;
  std::optional<int> find(std::string_view name) const;
  int next_id() const { return rules.empty() ? 0 : rules.rbegin()->first + 1; }

  /// Ids reachable from the start symbol, in first-visit order.
  std::vector<int> reachable() const;
  /// Drops rules unreachable from the start symbol.
  void trim();
  /// Ids of nonterminals that derive at least one finite string.
  std::vector<int> productive() const;

  /// Structural problems: dangling references, empty terminals or bodies,
  /// unknown token classes, unreachable or non-productive rules, duplicate names.
  std::vector<std::string> validate(const TokenLattice& lattice = TokenLattice::standard()) const;

  /// Replaces every reference to `from` with `to` and removes `from`.
  void replace_nonterminal(int from, int to);
};

/// Compares grammars up to nonterminal ids, matching rules by name.
bool structurally_equal(const Grammar& a, const Grammar& b);

std::string escape_terminal(std::string_view bytes);
std::string to_string(const Element& e, const Grammar& g);
std::string to_string(const Alternative& alt, const Grammar& g);
/// One rule per line, start rule first, then the rest in id order.
std::string serialize(const Grammar& g);
Grammar parse_grammar(std::string_view text);

/// Plain context-free form of a grammar. Every original alternative becomes
/// one rule whose right-hand side mirrors its elements one to one; Optional
/// and Repeat elements turn into helper nonterminals.
struct Cfg {
  struct Symbol {
    enum class Kind { Nt, Literal, Token };
    Kind kind = Kind::Literal;
    int id = -1;  // Nt: cfg nonterminal; Token: index into `tokens`
    std::string text;
  };

  struct Production {
    int lhs = -1;
    std::vector<Symbol> rhs;
  };

  /// What a cfg nonterminal stands for in the source grammar.
  struct Origin {
    enum class Kind { Rule, Optional, RepeatList, RepeatBody };
    Kind kind = Kind::Rule;
    int source_nt = -1;  // Rule only
  };

  std::vector<std::string> names;
  std::vector<Origin> origins;
  std::vector<Production> productions;
  std::vector<std::vector<int>> by_lhs;
  /// For Rule nonterminals, the production index of each original alternative.
  std::vector<std::vector<int>> alternative_productions;
  std::vector<const CharClassPattern*> tokens;
  std::vector<bool> nullable;
  std::map<int, int> of_source;  // source nonterminal id -> cfg nonterminal
  int start = -1;
};

Cfg desugar(const Grammar& g, const TokenLattice& lattice = TokenLattice::standard());

/// Derivation of an input, keyed to the elements of the source grammar.
struct ParseTree {
  /// A matched element. For NtRef, `child` is the expansion node; for an
  /// Optional that matched something, `child` is the body node; for Repeat,
  /// `iterations` holds one body node per repetition.
  struct Item {
    std::size_t begin = 0, end = 0;
    int child = -1;
    std::vector<int> iterations;
  };

  /// An expanded element sequence: an alternative of `nt`, or a helper body
  /// (nt = -1, alternative = -1).
  struct Node {
    int nt = -1;
    int alternative = -1;
    std::size_t begin = 0, end = 0;
    std::vector<Item> items;
  };

  std::vector<Node> nodes;
  int root = -1;
};

/// Chart recognizer (Earley, with nullable completion).
bool accepts(const Cfg& cfg, std::string_view input);
bool accepts(const Grammar& g, std::string_view input,
             const TokenLattice& lattice = TokenLattice::standard());

/// One derivation of `input`, or nothing if it is not in the language.
std::optional<ParseTree> parse(const Cfg& cfg, std::string_view input);

inline constexpr int kDefaultMaxDepth = 40;

/// Random member of L(g): uniform alternatives until `max_depth` nonterminal
/// expansions deep, then cheapest expansions only.
std::string produce(const Grammar& g, std::uint64_t seed, int max_depth = kDefaultMaxDepth,
                    const TokenLattice& lattice = TokenLattice::standard());

}  // namespace grammine
