#include "grammine/generalize.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace grammine {

std::size_t default_query_budget() {
  if (const char* env = std::getenv("GRAMMINE_QUERY_BUDGET")) {
    char* end = nullptr;
    auto v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 10000;
}

namespace {

struct Signature {
  std::string key;
  Interval interval;
};

std::vector<Signature> signatures(const ExecutionTrace& trace) {
  std::vector<Signature> out;
  for (const auto& b : build_blocks(trace)) {
    if (b.kind == BlockKind::CallChain) {
      for (const auto& m : b.methods) out.push_back({"call:" + m, b.interval});
    } else {
      out.push_back({b.summary(), b.interval});
    }
  }
  return out;
}

std::multiset<std::string> touching(const std::vector<Signature>& sigs, const Interval& region) {
  std::multiset<std::string> out;
  for (const auto& s : sigs)
    if (s.interval.intersects(region)) out.insert(s.key);
  return out;
}

std::multiset<std::string> inside(const std::vector<Signature>& sigs, const Interval& region) {
  std::multiset<std::string> out;
  for (const auto& s : sigs)
    if (region.contains(s.interval)) out.insert(s.key);
  return out;
}

/// Half-open byte range as an interval.
Interval span(std::size_t begin, std::size_t end) {
  if (begin >= end) return {1, 0};
  return {begin, end - 1};
}

std::string hex(std::string_view bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 15]);
  }
  return out;
}

std::string unhex(std::string_view text) {
  std::string out;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  for (std::size_t i = 0; i + 1 < text.size(); i += 2) {
    int hi = nibble(text[i]), lo = nibble(text[i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("bad hex in query log");
    out.push_back(static_cast<char>(hi * 16 + lo));
  }
  return out;
}

}  // namespace

bool dataflow_equivalent(const ExecutionTrace& baseline, const ExecutionTrace& candidate,
                         const std::vector<RegionPair>& preserved,
                         const std::optional<RegionPair>& replaced) {
  auto a = signatures(baseline);
  auto b = signatures(candidate);
  for (const auto& [from, to] : preserved) {
    if (from.empty() || to.empty()) continue;
    if (touching(a, from) != touching(b, to)) return false;
  }
  if (replaced && !replaced->first.empty() && !replaced->second.empty())
    return inside(a, replaced->first) == inside(b, replaced->second);
  return true;
}

Learner::Learner(Oracle& oracle, std::vector<std::string> samples, const TokenLattice& lattice,
                 QueryBudget budget, GeneralizeConfig config)
    : oracle_(oracle),
      samples_(std::move(samples)),
      lattice_(lattice),
      budget_(budget),
      config_(config) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& out = run(samples_[i]);
    log_.push_back({log_.size(), samples_[i], out.verdict, "sample:" + std::to_string(i), {}});
    baselines_.push_back(out.trace);
  }
  last_committed_query_ = log_.size();
}

const Learner::Outcome& Learner::run(const std::string& input) {
  if (auto it = cache_.find(input); it != cache_.end()) return it->second;
  if (budget_.exhausted()) throw BudgetExhausted("query budget of " + std::to_string(budget_.max_queries) + " exhausted");
  ++budget_.used;
  Outcome out{oracle_.accepts(input), oracle_.trace(input)};
  return cache_.emplace(input, std::move(out)).first->second;
}

Verdict Learner::membership_query(const std::string& candidate, std::size_t sample,
                                  const std::vector<RegionPair>& preserved, const std::string& purpose,
                                  const std::optional<RegionPair>& replaced) {
  const auto& out = run(candidate);
  Verdict v = out.verdict;
  if (v == Verdict::Pass && out.trace && baselines_.at(sample) &&
      !dataflow_equivalent(*baselines_[sample], *out.trace, preserved, replaced))
    v = Verdict::Fail;
  log_.push_back({log_.size(), candidate, v, purpose, {}});
  return v;
}

bool Learner::commit(Grammar& current, Grammar next, const std::string& edit) {
  next.trim();
  for (auto& [id, rule] : next.rules) {
    std::vector<Alternative> unique;
    for (auto& alt : rule.alternatives)
      if (std::find(unique.begin(), unique.end(), alt) == unique.end()) unique.push_back(std::move(alt));
    rule.alternatives = std::move(unique);
  }
  bool ok = next.validate(lattice_).empty();
  if (ok) {
    auto cfg = desugar(next, lattice_);
    for (const auto& s : samples_)
      if (!accepts(cfg, s)) {
        ok = false;
        break;
      }
  }
  if (!ok) {
    ++rejected_;
    return false;
  }
  for (std::size_t i = last_committed_query_; i < log_.size(); ++i) log_[i].edit = edit;
  last_committed_query_ = log_.size();
  current = std::move(next);
  ++commits_;
  if (on_commit) on_commit(current, edit);
  return true;
}

namespace {

/// Parse trees of every sample under one grammar.
class Parses {
 public:
  Parses(const Grammar& g, const Learner& learner) : samples_(learner.samples()) {
    auto cfg = desugar(g, learner.lattice());
    for (const auto& s : samples_) trees_.push_back(parse(cfg, s));
  }

  struct Occurrence {
    std::size_t sample;
    const ParseTree::Node* node;
  };

  /// Nodes expanding `nt` (any alternative when `alt` < 0), in sample order then pre-order.
  std::vector<Occurrence> of(int nt, int alt = -1, std::size_t limit = SIZE_MAX) const {
    std::vector<Occurrence> out;
    for (std::size_t s = 0; s < trees_.size() && out.size() < limit; ++s) {
      if (!trees_[s]) continue;
      const auto& tree = *trees_[s];
      std::function<void(int)> walk = [&](int id) {
        if (out.size() >= limit) return;
        const auto& n = tree.nodes[id];
        if (n.nt == nt && (alt < 0 || n.alternative == alt)) out.push_back({s, &n});
        for (const auto& item : n.items) {
          if (item.child >= 0) walk(item.child);
          for (int it : item.iterations) walk(it);
        }
      };
      if (tree.root >= 0) walk(tree.root);
    }
    return out;
  }

  const std::string& sample(std::size_t i) const { return samples_[i]; }
  const ParseTree& tree(std::size_t i) const { return *trees_[i]; }

 private:
  const std::vector<std::string>& samples_;
  std::vector<std::optional<ParseTree>> trees_;
};

struct Candidate {
  std::string text;
  std::vector<RegionPair> preserved;
  std::optional<RegionPair> replaced;
};

/// Sample with the items [first, last] of `node` replaced by `replacement`.
/// The other items of the node, and everything outside it, are preserved.
Candidate splice(const std::string& sample, const ParseTree::Node& node, std::size_t first,
                 std::size_t last, const std::string& replacement) {
  std::size_t b = node.items[first].begin, e = node.items[last].end;
  Candidate c;
  c.text = sample.substr(0, b) + replacement + sample.substr(e);
  auto shift = [&](std::size_t pos) { return pos - e + b + replacement.size(); };
  c.preserved.push_back({span(0, node.begin), span(0, node.begin)});
  c.preserved.push_back({span(node.end, sample.size()), span(shift(node.end), c.text.size())});
  for (std::size_t k = 0; k < node.items.size(); ++k) {
    const auto& item = node.items[k];
    if (k >= first && k <= last) continue;
    if (k < first)
      c.preserved.push_back({span(item.begin, item.end), span(item.begin, item.end)});
    else
      c.preserved.push_back({span(item.begin, item.end), span(shift(item.begin), shift(item.end))});
  }
  return c;
}

/// Candidate replacing the whole fragment of `node`. Program elements lying
/// inside the fragment must stay the same.
Candidate replace_node(const std::string& sample, const ParseTree::Node& node, const std::string& replacement) {
  Candidate c;
  c.text = sample.substr(0, node.begin) + replacement + sample.substr(node.end);
  std::size_t tail = node.begin + replacement.size();
  c.preserved.push_back({span(0, node.begin), span(0, node.begin)});
  c.preserved.push_back({span(node.end, sample.size()), span(tail, c.text.size())});
  c.replaced = RegionPair{span(node.begin, node.end), span(node.begin, tail)};
  return c;
}

enum class SpanResult { Pass, Fail, Untested };

/// Omits items [first, last] in up to `max_occurrences` occurrences of the alternative.
SpanResult probe_omission(const Parses& parses, Learner& learner, const Grammar& g, int nt, int alt,
                          std::size_t first, std::size_t last) {
  auto occurrences = parses.of(nt, alt, learner.config().max_occurrences);
  std::ostringstream purpose;
  purpose << "optional:" << g.rule(nt).name << ':' << alt << ':' << first << '-' << last;
  bool tested = false;
  for (const auto& occ : occurrences) {
    const auto& sample = parses.sample(occ.sample);
    if (occ.node->items[first].begin == occ.node->items[last].end) continue;
    auto c = splice(sample, *occ.node, first, last, "");
    tested = true;
    if (learner.membership_query(c.text, occ.sample, c.preserved, purpose.str()) == Verdict::Fail)
      return SpanResult::Fail;
  }
  return tested ? SpanResult::Pass : SpanResult::Untested;
}

std::string describe(const Grammar& g, int nt, const Alternative& from, const Alternative& to) {
  return g.rule(nt).name + ": " + to_string(from, g) + " => " + to_string(to, g);
}

struct Span {
  std::size_t first, last;
  std::size_t length() const { return last - first + 1; }
  bool operator==(const Span&) const = default;
  auto operator<=>(const Span&) const = default;
};

bool laminar(const Span& a, const Span& b) {
  bool disjoint = a.last < b.first || b.last < a.first;
  bool nested = (a.first <= b.first && b.last <= a.last) || (b.first <= a.first && a.last <= b.last);
  return disjoint || nested;
}

/// True when `target` is exactly the union of the members it contains.
bool expressible(const Span& target, const std::vector<Span>& members) {
  std::vector<bool> covered(target.length(), false);
  for (const auto& m : members)
    if (target.first <= m.first && m.last <= target.last)
      for (auto k = m.first; k <= m.last; ++k) covered[k - target.first] = true;
  return std::all_of(covered.begin(), covered.end(), [](bool b) { return b; });
}

/// Laminar subset of `passing` expressing the most passing spans without
/// expressing a failing span that `fixed` alone does not already express.
/// Ties go to the family with more members, so tested spans stay visible.
std::vector<Span> choose_family(const std::vector<Span>& passing, const std::vector<Span>& failing,
                                const std::vector<Span>& fixed, std::size_t exhaustive_limit) {
  std::vector<Span> forced_failures;
  for (const auto& f : failing)
    if (expressible(f, fixed)) forced_failures.push_back(f);
  auto admissible = [&](const std::vector<Span>& family) {
    auto all = family;
    all.insert(all.end(), fixed.begin(), fixed.end());
    for (const auto& f : failing)
      if (expressible(f, all) && std::find(forced_failures.begin(), forced_failures.end(), f) == forced_failures.end())
        return false;
    return true;
  };
  auto score = [&](const std::vector<Span>& family) {
    auto all = family;
    all.insert(all.end(), fixed.begin(), fixed.end());
    return std::count_if(passing.begin(), passing.end(), [&](const Span& p) { return expressible(p, all); });
  };

  std::vector<Span> best;
  if (passing.size() <= exhaustive_limit) {
    long best_score = -1;
    for (std::uint32_t mask = 0; mask < (1u << passing.size()); ++mask) {
      std::vector<Span> family;
      bool ok = true;
      for (std::size_t i = 0; i < passing.size() && ok; ++i) {
        if (!(mask & (1u << i))) continue;
        for (const auto& m : family)
          if (!laminar(m, passing[i])) ok = false;
        family.push_back(passing[i]);
      }
      if (!ok || !admissible(family)) continue;
      long s = score(family);
      if (s > best_score || (s == best_score && family.size() > best.size())) {
        best_score = s;
        best = family;
      }
    }
    return best;
  }
  auto order = passing;
  std::stable_sort(order.begin(), order.end(), [](const Span& a, const Span& b) { return a.length() > b.length(); });
  for (const auto& p : order) {
    if (!std::all_of(best.begin(), best.end(), [&](const Span& m) { return laminar(m, p); })) continue;
    best.push_back(p);
    if (!admissible(best)) best.pop_back();
  }
  return best;
}

/// Elements [lo, hi] of `alt` with every family member, except `self`, wrapped in an Optional.
Alternative nest(const Alternative& alt, const std::vector<Span>& family, std::size_t lo, std::size_t hi,
                 std::optional<Span> self = std::nullopt) {
  Alternative out;
  std::size_t pos = lo;
  while (pos <= hi) {
    std::optional<Span> pick;
    for (const auto& m : family)
      if (m.first == pos && m.last <= hi && m != self && (!pick || m.length() > pick->length())) pick = m;
    if (pick) {
      out.push_back(Element::optional(nest(alt, family, pick->first, pick->last, pick)));
      pos = pick->last + 1;
    } else {
      out.push_back(alt[pos++]);
    }
  }
  return out;
}

bool is_optional(const Element& e) { return e.kind == Element::Kind::Optional; }

bool nullable(const Element& e) { return is_optional(e) || (e.kind == Element::Kind::Repeat && e.min == 0); }

bool all_nullable(const Alternative& alt) { return std::all_of(alt.begin(), alt.end(), nullable); }

/// Runs of equal adjacent elements are left to the repetition pass.
bool in_run(const Alternative& alt, std::size_t k) {
  return (k > 0 && alt[k - 1] == alt[k]) || (k + 1 < alt.size() && alt[k + 1] == alt[k]);
}

void optional_pass(Grammar& g, Learner& learner, bool singles_only) {
  for (int nt : g.reachable()) {
    if (!g.rules.count(nt)) continue;
    for (std::size_t a = 0; a < g.rule(nt).alternatives.size(); ++a) {
      const Alternative alt = g.rule(nt).alternatives[a];
      std::size_t n = alt.size();
      if (n < 2) continue;
      bool full = !singles_only && n <= learner.config().max_span_elements;
      Parses parses(g, learner);
      std::vector<Span> passing, failing, fixed;
      for (std::size_t k = 0; k < n; ++k)
        if (nullable(alt[k])) fixed.push_back({k, k});
      for (std::size_t len = full ? n - 1 : 1; len >= 1; --len) {
        for (std::size_t first = n - len + 1; first-- > 0;) {
          Span s{first, first + len - 1};
          if (len == 1 && nullable(alt[first])) continue;
          if (singles_only && in_run(alt, first)) continue;
          auto r = probe_omission(parses, learner, g, nt, static_cast<int>(a), s.first, s.last);
          if (r == SpanResult::Pass) passing.push_back(s);
          else if (r == SpanResult::Fail) failing.push_back(s);
        }
      }
      if (passing.empty()) continue;
      auto family = choose_family(passing, failing, fixed, learner.config().exhaustive_spans);
      if (family.empty()) continue;
      auto next_alt = nest(alt, family, 0, n - 1);
      if (all_nullable(next_alt) && !all_nullable(alt) &&
          probe_omission(parses, learner, g, nt, static_cast<int>(a), 0, n - 1) == SpanResult::Fail) {
        failing.push_back({0, n - 1});
        family = choose_family(passing, failing, fixed, learner.config().exhaustive_spans);
        if (family.empty()) continue;
        next_alt = nest(alt, family, 0, n - 1);
      }
      Grammar next = g;
      auto& alts = next.rule(nt).alternatives;
      alts[a] = next_alt;
      learner.commit(g, std::move(next), describe(g, nt, alt, next_alt));
    }
  }
}

}  // namespace

void find_single_optionals(Grammar& g, Learner& learner) { optional_pass(g, learner, true); }

void find_optionals(Grammar& g, Learner& learner) { optional_pass(g, learner, false); }

namespace {

struct Period {
  std::size_t p = 0, unit = 0, sep = 0, copies = 0;
  std::size_t coverage() const { return copies * unit + (copies - 1) * sep; }
};

/// Tandem repeats `u (s u)+` in the skeleton, best coverage first.
std::vector<Period> find_periods(const Alternative& sk, const GeneralizeConfig& config) {
  std::vector<Period> out;
  auto same = [&](std::size_t a, std::size_t b, std::size_t len) {
    return std::equal(sk.begin() + a, sk.begin() + a + len, sk.begin() + b);
  };
  for (std::size_t L = 1; L <= static_cast<std::size_t>(config.max_unit); ++L)
    for (std::size_t S = 0; S <= static_cast<std::size_t>(config.max_separator); ++S)
      for (std::size_t p = 0; p + L <= sk.size(); ++p) {
        bool terminals = std::all_of(sk.begin() + p + L, sk.begin() + std::min(sk.size(), p + L + S),
                                     [](const Element& e) { return e.kind == Element::Kind::Terminal; });
        if (!terminals) continue;
        std::size_t m = 1, q = p + L;
        while (q + S + L <= sk.size() && (m == 1 || same(p + L, q, S)) && same(p, q + S, L)) {
          ++m;
          q += S + L;
        }
        if (m >= 2) out.push_back({p, L, S, m});
      }
  std::stable_sort(out.begin(), out.end(), [](const Period& a, const Period& b) {
    if (a.coverage() != b.coverage()) return a.coverage() > b.coverage();
    if (a.unit != b.unit) return a.unit < b.unit;
    return a.sep < b.sep;
  });
  return out;
}

bool subsequence(const Alternative& small, const Alternative& big) {
  std::size_t i = 0;
  for (const auto& e : big)
    if (i < small.size() && small[i] == e) ++i;
  return i == small.size();
}

/// Shortest sequence of which every slot content is a subsequence.
std::optional<Alternative> unify(const std::vector<Alternative>& slots) {
  Alternative result;
  for (const auto& s : slots) {
    if (subsequence(s, result)) continue;
    if (!subsequence(result, s)) return std::nullopt;
    result = s;
  }
  return result;
}

std::string fresh_name(const Grammar& g, const std::string& base) {
  if (!g.find(base)) return base;
  for (int i = 2;; ++i)
    if (!g.find(base + std::to_string(i))) return base + std::to_string(i);
}

class RepetitionRewriter {
 public:
  RepetitionRewriter(Grammar& g, Learner& learner, int nt, std::size_t a)
      : g_(g), learner_(learner), nt_(nt), a_(a), alt_(g.rule(nt).alternatives[a]) {
    for (std::size_t k = 0; k < alt_.size(); ++k)
      if (!is_optional(alt_[k])) skel_.push_back(k);
    for (auto k : skel_) sk_.push_back(alt_[k]);
  }

  const Alternative& skeleton() const { return sk_; }

  /// Tests `r` against the oracle and commits the rewrite if it generalizes.
  bool apply(const Period& r) {
    r_ = r;
    if (!build_slots()) return false;
    Parses parses(g_, learner_);
    auto occurrences = parses.of(nt_, static_cast<int>(a_), learner_.config().max_occurrences);
    if (occurrences.empty()) return false;
    for (int k = 1; k <= learner_.config().max_copies; ++k)
      for (const auto& occ : occurrences)
        if (static_cast<std::size_t>(k) != r.copies && !probe(parses, occ, k)) return false;
    bool empty_ok = std::all_of(occurrences.begin(), occurrences.end(),
                                [&](const Parses::Occurrence& occ) { return probe(parses, occ, 0); });
    if (empty_ok && rest_nullable() &&
        probe_omission(parses, learner_, g_, nt_, static_cast<int>(a_), 0, alt_.size() - 1) == SpanResult::Fail)
      empty_ok = false;
    return commit(parses, empty_ok);
  }

 private:
  std::size_t unit_pos(std::size_t copy, std::size_t j) const { return r_.p + copy * (r_.unit + r_.sep) + j; }
  std::size_t sep_pos(std::size_t copy, std::size_t j) const { return unit_pos(copy, r_.unit) + j; }
  std::size_t first_element() const { return skel_[r_.p]; }

  /// True when everything outside the repeated region can be omitted.
  bool rest_nullable() const {
    for (std::size_t k = 0; k < alt_.size(); ++k)
      if ((k < first_element() || k > last_element()) && !nullable(alt_[k])) return false;
    return true;
  }
  std::size_t last_element() const { return skel_[unit_pos(r_.copies - 1, r_.unit - 1)]; }

  Alternative between(std::size_t skel_a, std::size_t skel_b) const {
    return Alternative(alt_.begin() + static_cast<long>(skel_[skel_a] + 1), alt_.begin() + static_cast<long>(skel_[skel_b]));
  }

  bool build_slots() {
    unit_ = {};
    period_ = {};
    for (std::size_t j = 0; j < r_.unit; ++j) {
      unit_.push_back(sk_[r_.p + j]);
      if (j + 1 == r_.unit) break;
      std::vector<Alternative> slots;
      for (std::size_t c = 0; c < r_.copies; ++c) slots.push_back(between(unit_pos(c, j), unit_pos(c, j + 1)));
      auto u = unify(slots);
      if (!u) return false;
      unit_.insert(unit_.end(), u->begin(), u->end());
    }
    sep_ = {};
    for (std::size_t j = 0; j <= r_.sep; ++j) {
      std::vector<Alternative> slots;
      for (std::size_t c = 0; c + 1 < r_.copies; ++c) {
        std::size_t from = j == 0 ? unit_pos(c, r_.unit - 1) : sep_pos(c, j - 1);
        std::size_t to = j == r_.sep ? unit_pos(c + 1, 0) : sep_pos(c, j);
        slots.push_back(between(from, to));
      }
      auto u = unify(slots);
      if (!u) return false;
      sep_.insert(sep_.end(), u->begin(), u->end());
      if (j < r_.sep) sep_.push_back(sk_[sep_pos(0, j)]);
    }
    period_ = sep_;
    period_.insert(period_.end(), unit_.begin(), unit_.end());
    return true;
  }

  bool probe(const Parses& parses, const Parses::Occurrence& occ, int k) {
    const auto& sample = parses.sample(occ.sample);
    const auto& items = occ.node->items;
    std::size_t begin = items[first_element()].begin;
    std::size_t unit_end = items[skel_[unit_pos(0, r_.unit - 1)]].end;
    std::size_t period_end = items[skel_[unit_pos(1, r_.unit - 1)]].end;
    std::string middle;
    if (k > 0) middle = sample.substr(begin, unit_end - begin);
    for (int i = 1; i < k; ++i) middle += sample.substr(unit_end, period_end - unit_end);
    auto c = splice(sample, *occ.node, first_element(), last_element(), middle);
    if (k > 0) c.preserved.push_back({span(begin, unit_end), span(begin, unit_end)});
    std::string purpose = "repeat:" + g_.rule(nt_).name + ':' + std::to_string(a_) + ":k=" + std::to_string(k);
    return learner_.membership_query(c.text, occ.sample, c.preserved, purpose) == Verdict::Pass;
  }

  /// Alternatives of the unit's nonterminal used by the first, middle and last copies.
  struct Usage {
    std::set<int> first, not_first, last, not_last;
  };

  std::optional<Usage> usage(const Parses& parses) const {
    if (r_.unit != 1 || sk_[r_.p].kind != Element::Kind::NtRef) return std::nullopt;
    Usage u;
    for (const auto& occ : parses.of(nt_, static_cast<int>(a_))) {
      const auto& tree = parses.tree(occ.sample);
      for (std::size_t c = 0; c < r_.copies; ++c) {
        int child = occ.node->items[skel_[unit_pos(c, 0)]].child;
        if (child < 0) return std::nullopt;
        int alt = tree.nodes[child].alternative;
        (c == 0 ? u.first : u.not_first).insert(alt);
        (c + 1 == r_.copies ? u.last : u.not_last).insert(alt);
      }
    }
    return u;
  }

  static bool disjoint(const std::set<int>& a, const std::set<int>& b) {
    return std::none_of(a.begin(), a.end(), [&](int x) { return b.count(x) != 0; });
  }

  Grammar rewritten(Alternative middle, bool empty_ok) const {
    Grammar next = g_;
    if (empty_ok) middle = {Element::optional(std::move(middle))};
    Alternative out(alt_.begin(), alt_.begin() + static_cast<long>(first_element()));
    out.insert(out.end(), middle.begin(), middle.end());
    out.insert(out.end(), alt_.begin() + static_cast<long>(last_element() + 1), alt_.end());
    next.rule(nt_).alternatives[a_] = std::move(out);
    return next;
  }

  bool commit(const Parses& parses, bool empty_ok) {
    Alternative plain;
    if (period_ == unit_) {
      plain = {Element::repeat(unit_, empty_ok ? 0 : 1)};
      empty_ok = false;
    } else {
      plain = unit_;
      plain.push_back(Element::repeat(period_, 0));
    }
    auto base = rewritten(plain, empty_ok);
    std::string edit = describe(g_, nt_, alt_, base.rule(nt_).alternatives[a_]);

    auto u = usage(parses);
    bool first = u && !u->first.empty() && !u->not_first.empty() && disjoint(u->first, u->not_first);
    bool last = !first && u && !u->last.empty() && !u->not_last.empty() && disjoint(u->last, u->not_last);
    if (first || last) {
      int x = sk_[r_.p].nt;
      const auto& boundary = first ? u->first : u->last;
      Grammar next = g_;
      std::vector<Alternative> alts;
      for (int i : boundary) alts.push_back(g_.rule(x).alternatives[static_cast<std::size_t>(i)]);
      int special = next.add_rule(fresh_name(g_, g_.rule(x).name + (first ? "_FIRST" : "_LAST")), alts);
      Alternative middle;
      if (first) {
        middle = {Element::ref(special), Element::repeat(period_, 0)};
      } else {
        Alternative body = unit_;
        body.insert(body.end(), sep_.begin(), sep_.end());
        middle = {Element::repeat(body, 0), Element::ref(special)};
      }
      Grammar saved = g_;
      g_ = next;
      auto special_grammar = rewritten(middle, empty_ok);
      g_ = std::move(saved);
      auto pruned = special_grammar;
      auto& xs = pruned.rule(x).alternatives;
      for (auto it = boundary.rbegin(); it != boundary.rend(); ++it) xs.erase(xs.begin() + *it);
      std::string special_edit = describe(special_grammar, nt_, alt_, special_grammar.rule(nt_).alternatives[a_]);
      if (!xs.empty() && learner_.commit(g_, std::move(pruned), special_edit)) return true;
      if (learner_.commit(g_, std::move(special_grammar), special_edit)) return true;
    }
    return learner_.commit(g_, std::move(base), edit);
  }

  Grammar& g_;
  Learner& learner_;
  int nt_;
  std::size_t a_;
  Alternative alt_;
  std::vector<std::size_t> skel_;
  Alternative sk_;
  Period r_;
  Alternative unit_, sep_, period_;
};

}  // namespace

void generalize_repetitions(Grammar& g, Learner& learner) {
  for (int nt : g.reachable()) {
    if (!g.rules.count(nt)) continue;
    std::set<std::string> tried;
    for (std::size_t a = 0; a < g.rule(nt).alternatives.size(); ++a) {
      bool progress = true;
      while (progress && g.rules.count(nt) && a < g.rule(nt).alternatives.size()) {
        progress = false;
        RepetitionRewriter rewriter(g, learner, nt, a);
        std::string key = to_string(g.rule(nt).alternatives[a], g);
        for (const auto& r : find_periods(rewriter.skeleton(), learner.config())) {
          std::string id = key + '|' + std::to_string(r.p) + ',' + std::to_string(r.unit) + ',' + std::to_string(r.sep);
          if (!tried.insert(id).second) continue;
          if (rewriter.apply(r)) {
            progress = true;
            break;
          }
        }
      }
    }
  }
}

void generalize_tokens(Grammar& g, Learner& learner) {
  const auto& lattice = learner.lattice();
  for (int nt : g.reachable()) {
    if (!g.rules.count(nt)) continue;
    const auto& rule = g.rule(nt);
    std::vector<std::string> strings;
    for (const auto& alt : rule.alternatives) {
      if (alt.size() != 1 || alt[0].kind != Element::Kind::Terminal) {
        strings.clear();
        break;
      }
      strings.push_back(alt[0].text);
    }
    if (strings.empty()) continue;
    auto smallest = lattice.smallest_containing(strings);
    if (!smallest) continue;
    Parses parses(g, learner);
    auto occurrences = parses.of(nt);
    std::string name = rule.name;
    auto passes = [&](const std::string& cls) {
      const auto& probes = lattice.get(cls).probes;
      std::size_t n = std::min(probes.size(), learner.config().probes_per_class);
      for (const auto& occ : occurrences)
        for (std::size_t i = 0; i < n; ++i) {
          auto c = replace_node(parses.sample(occ.sample), *occ.node, probes[i]);
          if (learner.membership_query(c.text, occ.sample, c.preserved, "token:" + name + ':' + cls, c.replaced) == Verdict::Fail)
            return false;
        }
      return true;
    };
    if (occurrences.empty() || !passes(*smallest)) continue;
    std::string current = *smallest;
    for (bool advanced = true; advanced;) {
      advanced = false;
      for (const auto& next : lattice.successors(current))
        if (passes(next)) {
          current = next;
          advanced = true;
          break;
        }
    }
    Grammar next = g;
    next.rule(nt).alternatives = {{Element::token(current)}};
    learner.commit(g, std::move(next), name + " => @" + current);
  }
}

Grammar generalize(Grammar g, Learner& learner) {
  try {
    find_single_optionals(g, learner);
    generalize_repetitions(g, learner);
    find_optionals(g, learner);
    generalize_tokens(g, learner);
  } catch (const BudgetExhausted&) {
  }
  return g;
}

void write_query_log(std::ostream& out, const std::vector<QueryRecord>& log) {
  for (const auto& q : log) out << "Q " << q.n << ' ' << to_string(q.verdict) << ' ' << q.purpose << ' ' << hex(q.input) << '\n';
}

std::vector<QueryRecord> parse_query_log(std::string_view text) {
  std::vector<QueryRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string tag, verdict, purpose, bytes;
    QueryRecord q;
    if (!(fields >> tag >> q.n >> verdict >> purpose) || tag != "Q")
      throw std::invalid_argument("malformed query log line: " + line);
    fields >> bytes;
    if (verdict == "PASS") q.verdict = Verdict::Pass;
    else if (verdict == "FAIL") q.verdict = Verdict::Fail;
    else throw std::invalid_argument("bad verdict in query log: " + verdict);
    q.purpose = purpose;
    q.input = unhex(bytes);
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace grammine
