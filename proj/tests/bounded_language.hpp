#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "grammine/grammar.hpp"

namespace grammine::testing {

constexpr std::size_t kMaxLen = 8;
using Language = std::set<std::string>;

inline Language concat(const Language& a, const Language& b) {
  Language out;
  for (const auto& x : a)
    for (const auto& y : b)
      if (x.size() + y.size() <= kMaxLen) out.insert(x + y);
  return out;
}

/// Strings of length <= kMaxLen derived by each nonterminal, by fixpoint
/// iteration over set semantics. Token classes are not supported.
class BoundedLanguages {
 public:
  explicit BoundedLanguages(const Grammar& g) : g_(g) {
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& [id, rule] : g.rules) {
        Language next = of_[id];
        for (const auto& alt : rule.alternatives) {
          auto l = sequence(alt);
          next.insert(l.begin(), l.end());
        }
        if (next.size() != of_[id].size()) {
          of_[id] = std::move(next);
          changed = true;
        }
      }
    }
  }

  const Language& start() { return of_[g_.start]; }

 private:
  Language sequence(const Alternative& alt) {
    Language acc{""};
    for (const auto& e : alt) acc = concat(acc, element(e));
    return acc;
  }

  Language element(const Element& e) {
    switch (e.kind) {
      case Element::Kind::Terminal: return e.text.size() <= kMaxLen ? Language{e.text} : Language{};
      case Element::Kind::NtRef: return of_[e.nt];
      case Element::Kind::Optional: {
        auto l = sequence(e.body);
        l.insert("");
        return l;
      }
      case Element::Kind::Repeat: {
        auto body = sequence(e.body);
        Language all = e.min == 0 ? Language{""} : Language{};
        Language power = body;
        for (std::size_t k = 1; k <= kMaxLen + 1; ++k) {
          all.insert(power.begin(), power.end());
          power = concat(power, body);
        }
        return all;
      }
      case Element::Kind::TokenRef: break;
    }
    throw std::invalid_argument("token classes are not supported by the oracle");
  }

  const Grammar& g_;
  std::map<int, Language> of_;
};

inline void all_strings(const std::string& alphabet, std::string& prefix, std::vector<std::string>& out) {
  out.push_back(prefix);
  if (prefix.size() == kMaxLen) return;
  for (char c : alphabet) {
    prefix.push_back(c);
    all_strings(alphabet, prefix, out);
    prefix.pop_back();
  }
}

struct Toy {
  const char* name;
  const char* text;
  const char* alphabet;
};

inline const Toy kToys[] = {
    {"ambiguous", "E ::= E '+' E | 'a'", "a+"},
    {"left-recursive", "L ::= L 'b' | L 'a' 'b' | 'a'", "ab"},
    {"nested optional and repeat", "S ::= 'x' [S] 'y' | ('z')+ ['x']", "xyz"},
    {"nullable right recursion", "P ::= '(' [P] ')' [P]", "()"},
    {"multi-byte terminals", "S ::= 'ab' S | 'a' | A 'b'\nA ::= 'a' | 'a' A", "ab"},
};


}  // namespace grammine::testing
