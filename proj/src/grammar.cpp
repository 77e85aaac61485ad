#include "grammine/grammar.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace grammine {

Element Element::terminal(std::string bytes) {
  Element e;
  e.kind = Kind::Terminal;
  e.text = std::move(bytes);
  return e;
}

Element Element::ref(int nt) {
  Element e;
  e.kind = Kind::NtRef;
  e.nt = nt;
  return e;
}

Element Element::token(std::string cls) {
  Element e;
  e.kind = Kind::TokenRef;
  e.text = std::move(cls);
  return e;
}

Element Element::optional(std::vector<Element> body) {
  Element e;
  e.kind = Kind::Optional;
  e.body = std::move(body);
  return e;
}

Element Element::repeat(std::vector<Element> body, int min) {
  Element e;
  e.kind = Kind::Repeat;
  e.body = std::move(body);
  e.min = min;
  return e;
}

SyntaxError::SyntaxError(std::size_t line, std::size_t column, const std::string& what)
    : GrammarError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                   what),
      line(line),
      column(column) {}

int Grammar::add_rule(std::string name, std::vector<Alternative> alternatives) {
  int id = next_id();
  rules.emplace(id, Rule{std::move(name), std::move(alternatives)});
  if (start < 0) start = id;
  return id;
}

Rule& Grammar::rule(int id) {
  auto it = rules.find(id);
  if (it == rules.end()) throw GrammarError("no rule with id " + std::to_string(id));
  return it->second;
}

const Rule& Grammar::rule(int id) const {
  auto it = rules.find(id);
  if (it == rules.end()) throw GrammarError("no rule with id " + std::to_string(id));
  return it->second;
}

std::optional<int> Grammar::find(std::string_view name) const {
  for (const auto& [id, r] : rules)
    if (r.name == name) return id;
  return std::nullopt;
}

namespace {

void for_each_element(const std::vector<Element>& seq, const std::function<void(const Element&)>& f) {
  for (const auto& e : seq) {
    f(e);
    for_each_element(e.body, f);
  }
}

void for_each_element_mut(std::vector<Element>& seq, const std::function<void(Element&)>& f) {
  for (auto& e : seq) {
    f(e);
    for_each_element_mut(e.body, f);
  }
}

}  // namespace

std::vector<int> Grammar::reachable() const {
  std::vector<int> order;
  if (!rules.count(start)) return order;
  std::set<int> seen{start};
  order.push_back(start);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const auto& alt : rule(order[i]).alternatives)
      for_each_element(alt, [&](const Element& e) {
        if (e.kind == Element::Kind::NtRef && rules.count(e.nt) && seen.insert(e.nt).second)
          order.push_back(e.nt);
      });
  }
  return order;
}

void Grammar::trim() {
  auto keep = reachable();
  std::set<int> live(keep.begin(), keep.end());
  for (auto it = rules.begin(); it != rules.end();) {
    if (live.count(it->first)) ++it;
    else it = rules.erase(it);
  }
}

std::vector<int> Grammar::productive() const {
  std::set<int> done;
  std::function<bool(const Element&)> ok = [&](const Element& e) {
    switch (e.kind) {
      case Element::Kind::Terminal:
      case Element::Kind::TokenRef:
      case Element::Kind::Optional:
        return true;
      case Element::Kind::NtRef:
        return done.count(e.nt) != 0;
      case Element::Kind::Repeat:
        return e.min == 0 || std::all_of(e.body.begin(), e.body.end(), ok);
    }
    return false;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [id, r] : rules) {
      if (done.count(id)) continue;
      for (const auto& alt : r.alternatives) {
        if (std::all_of(alt.begin(), alt.end(), ok)) {
          done.insert(id);
          changed = true;
          break;
        }
      }
    }
  }
  return {done.begin(), done.end()};
}

std::vector<std::string> Grammar::validate(const TokenLattice& lattice) const {
  std::vector<std::string> problems;
  if (!rules.count(start)) problems.push_back("start symbol has no rule");
  std::set<std::string> names;
  for (const auto& [id, r] : rules) {
    if (!names.insert(r.name).second) problems.push_back("duplicate rule name " + r.name);
    if (r.alternatives.empty()) problems.push_back(r.name + " has no alternatives");
    for (const auto& alt : r.alternatives) {
      if (alt.empty()) problems.push_back(r.name + " has an empty alternative");
      for_each_element(alt, [&](const Element& e) {
        switch (e.kind) {
          case Element::Kind::Terminal:
            if (e.text.empty()) problems.push_back(r.name + " has an empty terminal");
            break;
          case Element::Kind::NtRef:
            if (!rules.count(e.nt))
              problems.push_back(r.name + " references undefined nonterminal " + std::to_string(e.nt));
            break;
          case Element::Kind::TokenRef:
            if (!lattice.has(e.text)) problems.push_back(r.name + " uses unknown token class @" + e.text);
            break;
          case Element::Kind::Optional:
          case Element::Kind::Repeat:
            if (e.body.empty()) problems.push_back(r.name + " has an empty group");
            break;
        }
      });
    }
  }
  auto reach = reachable();
  std::set<int> live(reach.begin(), reach.end());
  auto prod = productive();
  std::set<int> productive_set(prod.begin(), prod.end());
  for (const auto& [id, r] : rules) {
    if (!live.count(id)) problems.push_back(r.name + " is unreachable");
    if (!productive_set.count(id)) problems.push_back(r.name + " is not productive");
  }
  return problems;
}

void Grammar::replace_nonterminal(int from, int to) {
  for (auto& [id, r] : rules)
    for (auto& alt : r.alternatives)
      for_each_element_mut(alt, [&](Element& e) {
        if (e.kind == Element::Kind::NtRef && e.nt == from) e.nt = to;
      });
  if (start == from) start = to;
  if (from != to) rules.erase(from);
}

namespace {

std::string nt_name(const Grammar& g, int id) {
  auto it = g.rules.find(id);
  return it == g.rules.end() ? "<" + std::to_string(id) + ">" : it->second.name;
}

void append_sequence(std::string& out, const std::vector<Element>& seq, const Grammar& g) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out.push_back(' ');
    out += to_string(seq[i], g);
  }
}

}  // namespace

std::string escape_terminal(std::string_view bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out = "'";
  for (unsigned char c : bytes) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      case '\'': out += "\\'"; break;
      default:
        if (c < 0x20 || c >= 0x7f) {
          out += "\\x";
          out.push_back(digits[c >> 4]);
          out.push_back(digits[c & 0xf]);
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  return out + "'";
}

std::string to_string(const Element& e, const Grammar& g) {
  std::string out;
  switch (e.kind) {
    case Element::Kind::Terminal: return escape_terminal(e.text);
    case Element::Kind::NtRef: return nt_name(g, e.nt);
    case Element::Kind::TokenRef: return "@" + e.text;
    case Element::Kind::Optional:
      out = "[";
      append_sequence(out, e.body, g);
      return out + "]";
    case Element::Kind::Repeat:
      out = "(";
      append_sequence(out, e.body, g);
      return out + (e.min == 0 ? ")*" : ")+");
  }
  return out;
}

std::string to_string(const Alternative& alt, const Grammar& g) {
  std::string out;
  append_sequence(out, alt, g);
  return out;
}

std::string serialize(const Grammar& g) {
  std::string out;
  auto emit = [&](int id, const Rule& r) {
    out += r.name;
    out += " ::=";
    for (std::size_t i = 0; i < r.alternatives.size(); ++i) {
      out += i ? " | " : " ";
      out += to_string(r.alternatives[i], g);
    }
    out += '\n';
    (void)id;
  };
  if (g.rules.count(g.start)) emit(g.start, g.rule(g.start));
  for (const auto& [id, r] : g.rules)
    if (id != g.start) emit(id, r);
  return out;
}

bool structurally_equal(const Grammar& a, const Grammar& b) {
  auto shape = [](const Grammar& g) {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& [id, r] : g.rules) {
      auto& alts = out[r.name];
      for (const auto& alt : r.alternatives) alts.push_back(to_string(alt, g));
    }
    return out;
  };
  if (a.rules.size() != b.rules.size()) return false;
  if (nt_name(a, a.start) != nt_name(b, b.start)) return false;
  return shape(a) == shape(b);
}

namespace {

class GrammarReader {
 public:
  explicit GrammarReader(std::string_view text) : text_(text) {}

  Grammar read() {
    // First pass: rule names in order, so references may point forward.
    Grammar g;
    std::vector<std::pair<std::size_t, std::size_t>> bodies;  // (line number, offset of rhs)
    std::size_t line_start = 0, line_no = 0;
    while (line_start < text_.size()) {
      auto end = text_.find('\n', line_start);
      if (end == std::string_view::npos) end = text_.size();
      ++line_no;
      std::string_view line = text_.substr(line_start, end - line_start);
      auto first = line.find_first_not_of(" \t\r");
      if (first != std::string_view::npos && line[first] != '#') {
        std::size_t p = first;
        while (p < line.size() && is_name_char(line[p])) ++p;
        if (p == first) throw SyntaxError(line_no, first + 1, "expected rule name");
        std::string name(line.substr(first, p - first));
        auto arrow = line.find("::=", p);
        if (arrow == std::string_view::npos || line.find_first_not_of(" \t", p) != arrow)
          throw SyntaxError(line_no, p + 1, "expected '::='");
        if (g.find(name)) throw SyntaxError(line_no, first + 1, "duplicate rule " + name);
        g.add_rule(name);
        bodies.emplace_back(line_no, line_start + arrow + 3);
      }
      line_start = end + 1;
    }
    if (g.rules.empty()) throw SyntaxError(1, 1, "grammar has no rules");
    int id = 0;
    for (auto [line_no_, offset] : bodies) {
      line_ = line_no_;
      line_begin_ = text_.rfind('\n', offset == 0 ? 0 : offset - 1);
      line_begin_ = line_begin_ == std::string_view::npos ? 0 : line_begin_ + 1;
      pos_ = offset;
      g.rule(id).alternatives = read_alternatives(g);
      ++id;
    }
    return g;
  }

 private:
  static bool is_name_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw SyntaxError(line_, pos_ - line_begin_ + 1, what);
  }

  bool at_eol() const { return pos_ >= text_.size() || text_[pos_] == '\n'; }

  void skip_space() {
    while (!at_eol() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }

  std::vector<Alternative> read_alternatives(const Grammar& g) {
    std::vector<Alternative> alts;
    while (true) {
      auto seq = read_sequence(g, 0);
      if (seq.empty()) fail("empty alternative");
      alts.push_back(std::move(seq));
      skip_space();
      if (at_eol()) break;
      if (text_[pos_] != '|') fail("expected '|' or end of line");
      ++pos_;
    }
    return alts;
  }

  // Reads elements until '|', end of line, or the closing bracket of a group.
  std::vector<Element> read_sequence(const Grammar& g, char closer) {
    std::vector<Element> seq;
    while (true) {
      skip_space();
      if (at_eol()) {
        if (closer) fail(std::string("missing '") + closer + "'");
        return seq;
      }
      char c = text_[pos_];
      if (c == '|') {
        if (closer) fail("'|' inside a group");
        return seq;
      }
      if (c == ']' || c == ')') {
        if (c != closer) fail(std::string("unexpected '") + c + "'");
        return seq;
      }
      seq.push_back(read_element(g));
    }
  }

  Element read_element(const Grammar& g) {
    char c = text_[pos_];
    if (c == '\'') return Element::terminal(read_terminal());
    if (c == '@') {
      ++pos_;
      auto name = read_name();
      if (name.empty()) fail("expected token class name after '@'");
      return Element::token(std::move(name));
    }
    if (c == '[') {
      ++pos_;
      auto body = read_sequence(g, ']');
      if (body.empty()) fail("empty optional");
      ++pos_;
      return Element::optional(std::move(body));
    }
    if (c == '(') {
      ++pos_;
      auto body = read_sequence(g, ')');
      if (body.empty()) fail("empty repetition");
      ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '*') {
        ++pos_;
        return Element::repeat(std::move(body), 0);
      }
      if (pos_ < text_.size() && text_[pos_] == '+') {
        ++pos_;
        return Element::repeat(std::move(body), 1);
      }
      fail("expected '*' or '+' after ')'");
    }
    auto save = pos_;
    auto name = read_name();
    if (name.empty()) fail(std::string("unexpected character '") + c + "'");
    auto id = g.find(name);
    if (!id) {
      pos_ = save;
      fail("undefined nonterminal " + name);
    }
    return Element::ref(*id);
  }

  std::string read_name() {
    auto begin = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(begin, pos_ - begin));
  }

  std::string read_terminal() {
    ++pos_;
    std::string out;
    while (true) {
      if (at_eol()) fail("unterminated terminal");
      char c = text_[pos_++];
      if (c == '\'') break;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (at_eol()) fail("unterminated escape");
      char e = text_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '\\': out.push_back('\\'); break;
        case '\'': out.push_back('\''); break;
        case 'x': {
          auto hex = [&](char h) -> int {
            if (h >= '0' && h <= '9') return h - '0';
            if (h >= 'a' && h <= 'f') return h - 'a' + 10;
            if (h >= 'A' && h <= 'F') return h - 'A' + 10;
            fail("bad \\x escape");
          };
          if (pos_ + 2 > text_.size()) fail("short \\x escape");
          int v = hex(text_[pos_]) * 16 + hex(text_[pos_ + 1]);
          pos_ += 2;
          out.push_back(static_cast<char>(v));
          break;
        }
        default: fail(std::string("unknown escape \\") + e);
      }
    }
    if (out.empty()) fail("empty terminal");
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
  std::size_t line_begin_ = 0;
};

}  // namespace

Grammar parse_grammar(std::string_view text) { return GrammarReader(text).read(); }

}  // namespace grammine
