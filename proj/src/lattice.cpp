#include "grammine/lattice.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace grammine {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Reads one possibly escaped byte at `pos`, advancing it.
unsigned char read_byte(std::string_view s, std::size_t& pos) {
  if (pos >= s.size()) throw std::invalid_argument("pattern ends early");
  char c = s[pos++];
  if (c != '\\') return static_cast<unsigned char>(c);
  if (pos >= s.size()) throw std::invalid_argument("dangling escape in pattern");
  char e = s[pos++];
  switch (e) {
    case 'n': return '\n';
    case 't': return '\t';
    case 'r': return '\r';
    case 'x': {
      if (pos + 2 > s.size()) throw std::invalid_argument("short \\x escape");
      int hi = hex_value(s[pos]), lo = hex_value(s[pos + 1]);
      if (hi < 0 || lo < 0) throw std::invalid_argument("bad \\x escape");
      pos += 2;
      return static_cast<unsigned char>(hi * 16 + lo);
    }
    default: return static_cast<unsigned char>(e);
  }
}

std::string escape_pattern_byte(unsigned char c, bool in_class) {
  switch (c) {
    case '\n': return "\\n";
    case '\t': return "\\t";
    case '\r': return "\\r";
    case '\\': return "\\\\";
    case '/': return "\\/";
    default: break;
  }
  if (in_class && (c == ']' || c == '-' || c == '^' || c == '[')) return std::string("\\") + char(c);
  if (c < 0x20 || c >= 0x7f) {
    static constexpr char digits[] = "0123456789abcdef";
    return std::string("\\x") + digits[c >> 4] + digits[c & 0xf];
  }
  return std::string(1, static_cast<char>(c));
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      default: out.push_back(static_cast<char>(c));
    }
  }
  return out + "\"";
}

constexpr std::string_view kStandardLattice = R"(# Predefined token classes, smallest first.
CLASS DIGIT /[0-9]/ probes: "7"
CLASS DIGITS /[0-9]+/ probes: "01"
CLASS POSITIVEINTEGER /[1-9][0-9]*/ probes: "10"
CLASS INTEGER /-?[1-9][0-9]*/ probes: "-10"
CLASS ALPHA /[A-Za-z]/ probes: "A"
CLASS ALPHAS /[A-Za-z]+/ probes: "Az"
CLASS ALPHANUM /[A-Za-z0-9]/ probes: "1"
CLASS ALPHANUMS /[A-Za-z0-9]+/ probes: "Az1"
CLASS WHITESPACE /[ \t]/ probes: " "
CLASS WHITESPACES /[ \t]+/ probes: " \t"
CLASS WHITESPACENEWLINE /[ \t\n\r]/ probes: "\n"
CLASS WHITESPACENEWLINES /[ \t\n\r]+/ probes: " \n\t\r"
CLASS HOSTNAME /[A-Za-z0-9.\-]+/ probes: "sub.domain-0.top"
CLASS PATH /[A-Za-z0-9.\/\-]+/ probes: "some/path-to/file0123.ext"
CLASS ABSOLUTEPATH /\/[A-Za-z0-9.\/\-]*/ probes: "/some/path-to/file0123.ext"
CLASS ALPHANUMWHITESPACE /[A-Za-z0-9 \t]/ probes: " "
CLASS ALPHANUMWHITESPACES /[A-Za-z0-9 \t]+/ probes: "Az1 \t"
CLASS ALPHANUMWITHSPECIAL /[A-Za-z0-9;:+=!?*()\/#$%&@._,\-]/ probes: ";"
CLASS ALPHANUMWITHSPECIALS /[A-Za-z0-9;:+=!?*()\/#$%&@._,\-]+/ probes: "Az1;:-+=!?*()/#$%&@", "=;:+!?*()/#$%&@.,_-Az1"
CLASS ALPHANUMWITHSPECIALWHITESPACE /[A-Za-z0-9;:+=!?*()\/#$%&@._,\- \t]/ probes: " "
CLASS ALPHANUMWITHSPECIALWHITESPACES /[A-Za-z0-9;:+=!?*()\/#$%&@._,\- \t]+/ probes: "Az1;:-+=!?*()/#$%&@ \t", "= \t;:+!?*()/#$%&@.,_-Az1"
CLASS PRINTABLENEWLINE /[A-Za-z0-9;:+=!?*()\/#$%&@._,\- \t\n\r]/ probes: "\n"
CLASS PRINTABLENEWLINES /[A-Za-z0-9;:+=!?*()\/#$%&@._,\- \t\n\r]+/ probes: "Az1;:-+=!?*()/#$%&@ \n\t\r"
CLASS PRINTABLE /[\x20-\x7e\t\n\r]/ probes: "~"
CLASS PRINTABLES /[\x20-\x7e\t\n\r]+/ probes: "Az1;:-+=!?*()/#$%&@ \n\t\r\"'<>[]{}\\^`|~"
EDGE DIGIT DIGITS
EDGE DIGIT ALPHANUM
EDGE POSITIVEINTEGER DIGITS
EDGE POSITIVEINTEGER INTEGER
EDGE DIGITS ALPHANUMS
EDGE INTEGER HOSTNAME
EDGE ALPHA ALPHAS
EDGE ALPHA ALPHANUM
EDGE ALPHAS ALPHANUMS
EDGE ALPHANUM ALPHANUMS
EDGE ALPHANUM ALPHANUMWHITESPACE
EDGE ALPHANUM ALPHANUMWITHSPECIAL
EDGE ALPHANUMS HOSTNAME
EDGE ALPHANUMS ALPHANUMWHITESPACES
EDGE WHITESPACE WHITESPACES
EDGE WHITESPACE WHITESPACENEWLINE
EDGE WHITESPACE ALPHANUMWHITESPACE
EDGE WHITESPACES WHITESPACENEWLINES
EDGE WHITESPACES ALPHANUMWHITESPACES
EDGE WHITESPACENEWLINE WHITESPACENEWLINES
EDGE WHITESPACENEWLINE PRINTABLENEWLINE
EDGE WHITESPACENEWLINES PRINTABLENEWLINES
EDGE HOSTNAME ALPHANUMWITHSPECIALS
EDGE HOSTNAME PATH
EDGE ABSOLUTEPATH PATH
EDGE PATH ALPHANUMWITHSPECIALS
EDGE ALPHANUMWHITESPACE ALPHANUMWHITESPACES
EDGE ALPHANUMWHITESPACE ALPHANUMWITHSPECIALWHITESPACE
EDGE ALPHANUMWHITESPACES ALPHANUMWITHSPECIALWHITESPACES
EDGE ALPHANUMWITHSPECIAL ALPHANUMWITHSPECIALS
EDGE ALPHANUMWITHSPECIAL ALPHANUMWITHSPECIALWHITESPACE
EDGE ALPHANUMWITHSPECIALS ALPHANUMWITHSPECIALWHITESPACES
EDGE ALPHANUMWITHSPECIALWHITESPACE ALPHANUMWITHSPECIALWHITESPACES
EDGE ALPHANUMWITHSPECIALWHITESPACE PRINTABLENEWLINE
EDGE ALPHANUMWITHSPECIALWHITESPACES PRINTABLENEWLINES
EDGE PRINTABLENEWLINE PRINTABLENEWLINES
EDGE PRINTABLENEWLINE PRINTABLE
EDGE PRINTABLENEWLINES PRINTABLES
EDGE PRINTABLE PRINTABLES
)";

}  // namespace

CharClassPattern CharClassPattern::parse(std::string_view source) {
  CharClassPattern p;
  p.source_ = std::string(source);
  std::size_t pos = 0;
  while (pos < source.size()) {
    Atom atom;
    if (source[pos] == '[') {
      ++pos;
      bool negate = false;
      if (pos < source.size() && source[pos] == '^') {
        negate = true;
        ++pos;
      }
      bool first = true;
      while (true) {
        if (pos >= source.size()) throw std::invalid_argument("unterminated class in " + p.source_);
        if (source[pos] == ']' && !first) {
          ++pos;
          break;
        }
        first = false;
        unsigned char lo = read_byte(source, pos);
        if (pos + 1 < source.size() && source[pos] == '-' && source[pos + 1] != ']') {
          ++pos;
          unsigned char hi = read_byte(source, pos);
          if (hi < lo) throw std::invalid_argument("reversed range in " + p.source_);
          for (unsigned c = lo; c <= hi; ++c) atom.bytes.set(c);
        } else {
          atom.bytes.set(lo);
        }
      }
      if (negate) atom.bytes.flip();
    } else if (source[pos] == '?' || source[pos] == '*' || source[pos] == '+') {
      throw std::invalid_argument("quantifier without operand in " + p.source_);
    } else {
      atom.bytes.set(read_byte(source, pos));
    }
    if (pos < source.size()) {
      switch (source[pos]) {
        case '?': atom.quantifier = Quantifier::Optional; ++pos; break;
        case '*': atom.quantifier = Quantifier::Star; ++pos; break;
        case '+': atom.quantifier = Quantifier::Plus; ++pos; break;
        default: break;
      }
    }
    p.atoms_.push_back(atom);
  }
  return p;
}

std::vector<std::size_t> CharClassPattern::match_ends(std::string_view text,
                                                      std::size_t start) const {
  // NFA simulation over atom indices; state k means "atoms before k are done".
  const std::size_t n = atoms_.size();
  std::vector<char> states(n + 1, 0), next(n + 1, 0);
  auto close = [&](std::vector<char>& s) {
    for (std::size_t k = 0; k < n; ++k)
      if (s[k] && atoms_[k].quantifier != Quantifier::One && atoms_[k].quantifier != Quantifier::Plus)
        s[k + 1] = 1;
  };
  std::vector<std::size_t> ends;
  states[0] = 1;
  close(states);
  if (states[n]) ends.push_back(start);
  for (std::size_t i = start; i < text.size(); ++i) {
    std::fill(next.begin(), next.end(), 0);
    bool any = false;
    const auto c = static_cast<unsigned char>(text[i]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!states[k] || !atoms_[k].bytes.test(c)) continue;
      any = true;
      next[k + 1] = 1;
      if (atoms_[k].quantifier == Quantifier::Star || atoms_[k].quantifier == Quantifier::Plus)
        next[k] = 1;
    }
    if (!any) break;
    std::swap(states, next);
    close(states);
    if (states[n]) ends.push_back(i + 1);
  }
  return ends;
}

bool CharClassPattern::matches(std::string_view text) const {
  auto ends = match_ends(text, 0);
  return !ends.empty() && ends.back() == text.size();
}

std::size_t CharClassPattern::min_length() const {
  std::size_t n = 0;
  for (const auto& a : atoms_)
    if (a.quantifier == Quantifier::One || a.quantifier == Quantifier::Plus) ++n;
  return n;
}

std::string CharClassPattern::sample(std::mt19937_64& rng, bool shortest) const {
  std::string out;
  std::bernoulli_distribution coin(0.5);
  for (const auto& a : atoms_) {
    std::size_t count = 0;
    switch (a.quantifier) {
      case Quantifier::One: count = 1; break;
      case Quantifier::Optional: count = (!shortest && coin(rng)) ? 1 : 0; break;
      case Quantifier::Star:
      case Quantifier::Plus:
        count = a.quantifier == Quantifier::Plus ? 1 : 0;
        if (!shortest)
          while (coin(rng)) ++count;
        break;
    }
    std::vector<unsigned char> choices;
    for (unsigned c = 0; c < 256; ++c)
      if (a.bytes.test(c)) choices.push_back(static_cast<unsigned char>(c));
    if (choices.empty()) throw std::logic_error("empty byte class in " + source_);
    std::uniform_int_distribution<std::size_t> pick(0, choices.size() - 1);
    for (std::size_t i = 0; i < count; ++i) out.push_back(static_cast<char>(choices[pick(rng)]));
  }
  return out;
}

const TokenLattice& TokenLattice::standard() {
  static const TokenLattice lattice = parse(kStandardLattice);
  return lattice;
}

TokenLattice TokenLattice::parse(std::string_view config) {
  TokenLattice lattice;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= config.size()) {
    auto end = config.find('\n', start);
    if (end == std::string_view::npos) end = config.size();
    std::string_view line = config.substr(start, end - start);
    start = end + 1;
    ++line_no;
    auto fail = [&](const std::string& what) {
      throw std::invalid_argument("lattice config line " + std::to_string(line_no) + ": " + what);
    };
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (line.starts_with("EDGE ")) {
      std::istringstream in{std::string(line.substr(5))};
      std::string a, b, extra;
      if (!(in >> a >> b) || (in >> extra)) fail("expected EDGE <smaller> <larger>");
      if (!lattice.has(a) || !lattice.has(b)) fail("edge names an undefined class");
      lattice.add_edge(a, b);
    } else if (line.starts_with("CLASS ")) {
      std::size_t pos = 6;
      auto name_end = line.find(' ', pos);
      if (name_end == std::string_view::npos) fail("expected CLASS <name> /<regex>/");
      TokenClass cls;
      cls.name = std::string(line.substr(pos, name_end - pos));
      pos = name_end + 1;
      if (pos >= line.size() || line[pos] != '/') fail("expected /<regex>/");
      ++pos;
      std::string regex;
      while (pos < line.size() && line[pos] != '/') {
        if (line[pos] == '\\' && pos + 1 < line.size()) regex.push_back(line[pos++]);
        regex.push_back(line[pos++]);
      }
      if (pos >= line.size()) fail("unterminated regex");
      ++pos;
      try {
        cls.pattern = CharClassPattern::parse(regex);
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
      auto rest = line.substr(pos);
      auto colon = rest.find("probes:");
      if (colon == std::string_view::npos) fail("expected probes: list");
      rest = rest.substr(colon + 7);
      std::size_t i = 0;
      while (i < rest.size()) {
        if (rest[i] == ' ' || rest[i] == ',') {
          ++i;
          continue;
        }
        if (rest[i] != '"') fail("probe must be double-quoted");
        ++i;
        std::string probe;
        while (i < rest.size() && rest[i] != '"') {
          if (rest[i] == '\\') {
            probe.push_back(static_cast<char>(read_byte(rest, i)));
          } else {
            probe.push_back(rest[i++]);
          }
        }
        if (i >= rest.size()) fail("unterminated probe");
        ++i;
        cls.probes.push_back(std::move(probe));
      }
      if (cls.probes.empty()) fail("class needs at least one probe");
      lattice.add_class(std::move(cls));
    } else {
      fail("unknown directive");
    }
  }
  return lattice;
}

std::string TokenLattice::to_config() const {
  std::ostringstream out;
  for (const auto& [name, cls] : classes_) {
    out << "CLASS " << name << " /";
    for (const auto& a : cls.pattern.atoms()) {
      std::size_t n = a.bytes.count();
      if (n == 1) {
        for (unsigned c = 0; c < 256; ++c)
          if (a.bytes.test(c)) out << escape_pattern_byte(static_cast<unsigned char>(c), false);
      } else {
        out << '[';
        for (unsigned c = 0; c < 256; ++c) {
          if (!a.bytes.test(c)) continue;
          unsigned e = c;
          while (e + 1 < 256 && a.bytes.test(e + 1)) ++e;
          out << escape_pattern_byte(static_cast<unsigned char>(c), true);
          if (e > c + 1) out << '-';
          if (e > c) out << escape_pattern_byte(static_cast<unsigned char>(e), true);
          c = e;
        }
        out << ']';
      }
      switch (a.quantifier) {
        case CharClassPattern::Quantifier::One: break;
        case CharClassPattern::Quantifier::Optional: out << '?'; break;
        case CharClassPattern::Quantifier::Star: out << '*'; break;
        case CharClassPattern::Quantifier::Plus: out << '+'; break;
      }
    }
    out << "/ probes:";
    for (std::size_t i = 0; i < cls.probes.size(); ++i) out << (i ? ", " : " ") << quote(cls.probes[i]);
    out << '\n';
  }
  for (const auto& [a, b] : edges_) out << "EDGE " << a << ' ' << b << '\n';
  return out.str();
}

void TokenLattice::add_class(TokenClass cls) {
  std::string name = cls.name;
  if (!classes_.emplace(name, std::move(cls)).second)
    throw std::invalid_argument("duplicate token class " + name);
}

void TokenLattice::add_edge(const std::string& smaller, const std::string& larger) {
  get(smaller);
  get(larger);
  edges_.emplace_back(smaller, larger);
}

const TokenClass& TokenLattice::get(std::string_view name) const {
  auto it = classes_.find(std::string(name));
  if (it == classes_.end()) throw UnknownClass("unknown token class " + std::string(name));
  return it->second;
}

std::vector<std::string> TokenLattice::successors(std::string_view name) const {
  get(name);
  std::vector<std::string> out;
  for (const auto& [a, b] : edges_)
    if (a == name) out.push_back(b);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> TokenLattice::predecessors(std::string_view name) const {
  get(name);
  std::vector<std::string> out;
  for (const auto& [a, b] : edges_)
    if (b == name) out.push_back(a);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<std::string> TokenLattice::smallest_containing(
    const std::vector<std::string>& strings) const {
  auto accepts_all = [&](const TokenClass& cls) {
    return std::all_of(strings.begin(), strings.end(),
                       [&](const std::string& s) { return cls.pattern.matches(s); });
  };
  std::set<std::string> candidates;
  for (const auto& [name, cls] : classes_)
    if (accepts_all(cls)) candidates.insert(name);
  std::vector<std::string> minimal;
  for (const auto& name : candidates) {
    auto preds = predecessors(name);
    if (std::none_of(preds.begin(), preds.end(),
                     [&](const std::string& p) { return candidates.count(p) != 0; }))
      minimal.push_back(name);
  }
  if (minimal.empty()) return std::nullopt;
  // Prefer the class with the most transitive supersets: it sits lowest.
  auto ancestors = [&](const std::string& name) {
    std::set<std::string> seen;
    std::vector<std::string> todo{name};
    while (!todo.empty()) {
      auto cur = todo.back();
      todo.pop_back();
      for (const auto& s : successors(cur))
        if (seen.insert(s).second) todo.push_back(s);
    }
    return seen.size();
  };
  std::stable_sort(minimal.begin(), minimal.end(), [&](const std::string& a, const std::string& b) {
    return ancestors(a) > ancestors(b);
  });
  return minimal.front();
}

std::vector<std::string> TokenLattice::check() const {
  std::vector<std::string> problems;
  for (const auto& [name, cls] : classes_) {
    if (cls.probes.empty()) problems.push_back(name + ": no probes");
    for (const auto& p : cls.probes)
      if (!cls.pattern.matches(p)) problems.push_back(name + ": probe " + quote(p) + " not in class");
  }
  for (const auto& [a, b] : edges_) {
    for (const auto& p : get(a).probes)
      if (!get(b).pattern.matches(p))
        problems.push_back("edge " + a + " -> " + b + ": probe " + quote(p) + " of " + a +
                           " rejected by " + b);
    if (a == b) problems.push_back("edge " + a + " -> " + b + " is a self-loop");
  }
  // Cycle check by DFS colouring.
  std::map<std::string, int> colour;
  std::function<bool(const std::string&)> visit = [&](const std::string& n) {
    colour[n] = 1;
    for (const auto& s : successors(n)) {
      if (colour[s] == 1) return true;
      if (colour[s] == 0 && visit(s)) return true;
    }
    colour[n] = 2;
    return false;
  };
  for (const auto& [name, cls] : classes_)
    if (colour[name] == 0 && visit(name)) {
      problems.push_back("edge relation has a cycle through " + name);
      break;
    }
  return problems;
}

}  // namespace grammine
