#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "grammine/grammar.hpp"

namespace grammine {

namespace {

class Desugarer {
 public:
  Desugarer(const Grammar& g, const TokenLattice& lattice) : g_(g), lattice_(lattice) {}

  Cfg run() {
    for (const auto& [id, r] : g_.rules)
      cfg_.of_source[id] = new_nt(r.name, {Cfg::Origin::Kind::Rule, id});
    if (!cfg_.of_source.count(g_.start)) throw GrammarError("start symbol has no rule");
    cfg_.start = cfg_.of_source.at(g_.start);
    for (const auto& [id, r] : g_.rules) {
      int lhs = cfg_.of_source.at(id);
      for (const auto& alt : r.alternatives) {
        auto rhs = convert(alt, r.name);
        cfg_.alternative_productions[lhs].push_back(add(lhs, std::move(rhs)));
      }
    }
    compute_nullable();
    return std::move(cfg_);
  }

 private:
  int new_nt(std::string name, Cfg::Origin origin) {
    cfg_.names.push_back(std::move(name));
    cfg_.origins.push_back(origin);
    cfg_.by_lhs.emplace_back();
    cfg_.alternative_productions.emplace_back();
    return static_cast<int>(cfg_.names.size()) - 1;
  }

  int add(int lhs, std::vector<Cfg::Symbol> rhs) {
    cfg_.productions.push_back({lhs, std::move(rhs)});
    int index = static_cast<int>(cfg_.productions.size()) - 1;
    cfg_.by_lhs[lhs].push_back(index);
    return index;
  }

  static Cfg::Symbol nt_symbol(int id) { return {Cfg::Symbol::Kind::Nt, id, {}}; }

  std::vector<Cfg::Symbol> convert(const std::vector<Element>& seq, const std::string& owner) {
    std::vector<Cfg::Symbol> rhs;
    for (const auto& e : seq) {
      switch (e.kind) {
        case Element::Kind::Terminal:
          rhs.push_back({Cfg::Symbol::Kind::Literal, -1, e.text});
          break;
        case Element::Kind::NtRef: {
          auto it = cfg_.of_source.find(e.nt);
          if (it == cfg_.of_source.end())
            throw GrammarError(owner + " references undefined nonterminal " + std::to_string(e.nt));
          rhs.push_back(nt_symbol(it->second));
          break;
        }
        case Element::Kind::TokenRef: {
          auto it = token_index_.find(e.text);
          if (it == token_index_.end()) {
            cfg_.tokens.push_back(&lattice_.get(e.text).pattern);
            it = token_index_.emplace(e.text, static_cast<int>(cfg_.tokens.size()) - 1).first;
          }
          rhs.push_back({Cfg::Symbol::Kind::Token, it->second, e.text});
          break;
        }
        case Element::Kind::Optional: {
          int h = new_nt(owner + "?", {Cfg::Origin::Kind::Optional, -1});
          auto body = convert(e.body, owner);
          add(h, {});
          add(h, std::move(body));
          rhs.push_back(nt_symbol(h));
          break;
        }
        case Element::Kind::Repeat: {
          int b = new_nt(owner + "#", {Cfg::Origin::Kind::RepeatBody, -1});
          add(b, convert(e.body, owner));
          int l = new_nt(owner + (e.min == 0 ? "*" : "+"), {Cfg::Origin::Kind::RepeatList, -1});
          if (e.min == 0) add(l, {});
          else add(l, {nt_symbol(b)});
          add(l, {nt_symbol(b), nt_symbol(l)});
          rhs.push_back(nt_symbol(l));
          break;
        }
      }
    }
    return rhs;
  }

  void compute_nullable() {
    cfg_.nullable.assign(cfg_.names.size(), false);
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& p : cfg_.productions) {
        if (cfg_.nullable[p.lhs]) continue;
        bool all = std::all_of(p.rhs.begin(), p.rhs.end(), [&](const Cfg::Symbol& s) {
          switch (s.kind) {
            case Cfg::Symbol::Kind::Nt: return bool(cfg_.nullable[s.id]);
            case Cfg::Symbol::Kind::Literal: return s.text.empty();
            case Cfg::Symbol::Kind::Token: return cfg_.tokens[s.id]->matches("");
          }
          return false;
        });
        if (all) {
          cfg_.nullable[p.lhs] = true;
          changed = true;
        }
      }
    }
  }

  const Grammar& g_;
  const TokenLattice& lattice_;
  Cfg cfg_;
  std::map<std::string, int> token_index_;
};

struct Item {
  int prod;
  int dot;
  std::size_t origin;
};

class Chart {
 public:
  Chart(const Cfg& cfg, std::string_view input, bool record)
      : cfg_(cfg), input_(input), record_(record), sets_(input.size() + 1),
        seen_(input.size() + 1), waiting_(input.size() + 1) {
    if (record_) spans_.resize(cfg.names.size());
  }

  bool run() {
    for (int p : cfg_.by_lhs[cfg_.start]) add(0, {p, 0, 0});
    const std::size_t n = input_.size();
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t k = 0; k < sets_[i].size(); ++k) {
        Item item = sets_[i][k];
        const auto& prod = cfg_.productions[item.prod];
        if (item.dot == static_cast<int>(prod.rhs.size())) {
          complete(i, item);
          continue;
        }
        const auto& sym = prod.rhs[item.dot];
        Item next{item.prod, item.dot + 1, item.origin};
        switch (sym.kind) {
          case Cfg::Symbol::Kind::Nt:
            for (int p : cfg_.by_lhs[sym.id]) add(i, {p, 0, i});
            if (cfg_.nullable[sym.id]) add(i, next);
            break;
          case Cfg::Symbol::Kind::Literal:
            if (input_.substr(i).starts_with(sym.text)) add(i + sym.text.size(), next);
            break;
          case Cfg::Symbol::Kind::Token:
            for (auto e : cfg_.tokens[sym.id]->match_ends(input_, i)) add(e, next);
            break;
        }
      }
    }
    for (const auto& item : sets_[n])
      if (item.origin == 0 && cfg_.productions[item.prod].lhs == cfg_.start &&
          item.dot == static_cast<int>(cfg_.productions[item.prod].rhs.size()))
        return true;
    return false;
  }

  /// Completed (begin, end) spans per cfg nonterminal; filled when recording.
  const std::vector<std::set<std::pair<std::size_t, std::size_t>>>& spans() const { return spans_; }

 private:
  void add(std::size_t at, Item item) {
    std::uint64_t key = (static_cast<std::uint64_t>(item.prod) << 40) |
                        (static_cast<std::uint64_t>(item.dot) << 32) | item.origin;
    if (!seen_[at].insert(key).second) return;
    sets_[at].push_back(item);
    const auto& rhs = cfg_.productions[item.prod].rhs;
    if (item.dot < static_cast<int>(rhs.size()) && rhs[item.dot].kind == Cfg::Symbol::Kind::Nt)
      waiting_[at][rhs[item.dot].id].push_back(sets_[at].size() - 1);
  }

  void complete(std::size_t i, const Item& item) {
    int lhs = cfg_.productions[item.prod].lhs;
    if (record_) spans_[lhs].emplace(item.origin, i);
    auto it = waiting_[item.origin].find(lhs);
    if (it == waiting_[item.origin].end()) return;
    // Indices, not references: add() may grow the same vector.
    for (std::size_t w = 0; w < it->second.size(); ++w) {
      Item parent = sets_[item.origin][it->second[w]];
      add(i, {parent.prod, parent.dot + 1, parent.origin});
      it = waiting_[item.origin].find(lhs);
    }
  }

  const Cfg& cfg_;
  std::string_view input_;
  bool record_;
  std::vector<std::vector<Item>> sets_;
  std::vector<std::unordered_set<std::uint64_t>> seen_;
  std::vector<std::unordered_map<int, std::vector<std::size_t>>> waiting_;
  std::vector<std::set<std::pair<std::size_t, std::size_t>>> spans_;
};

/// Rebuilds one derivation from the completed-span table.
class TreeBuilder {
 public:
  TreeBuilder(const Cfg& cfg, std::string_view input,
              const std::vector<std::set<std::pair<std::size_t, std::size_t>>>& spans)
      : cfg_(cfg), input_(input), spans_(spans) {
    for (std::size_t nt = 0; nt < cfg.alternative_productions.size(); ++nt)
      for (std::size_t a = 0; a < cfg.alternative_productions[nt].size(); ++a)
        alt_of_prod_[cfg.alternative_productions[nt][a]] = static_cast<int>(a);
  }

  std::optional<ParseTree> build() {
    int raw = derive(cfg_.start, 0, input_.size());
    if (raw < 0) return std::nullopt;
    ParseTree tree;
    tree.root = convert(raw, tree);
    return tree;
  }

 private:
  struct Raw {
    int nt;
    int prod;
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::vector<int> kids;  // raw index per Nt symbol, -1 otherwise
  };

  using Key = std::tuple<int, std::size_t, std::size_t>;

  int derive(int nt, std::size_t i, std::size_t j) {
    Key key{nt, i, j};
    if (auto it = done_.find(key); it != done_.end()) return it->second;
    if (!active_.insert(key).second) return -1;
    int result = -1;
    for (int p : cfg_.by_lhs[nt]) {
      Raw raw{nt, p, {}, {}};
      std::set<std::pair<int, std::size_t>> failed;
      if (match(raw, 0, i, j, failed)) {
        raws_.push_back(std::move(raw));
        result = static_cast<int>(raws_.size()) - 1;
        break;
      }
    }
    active_.erase(key);
    if (result >= 0) done_.emplace(key, result);
    return result;
  }

  bool match(Raw& raw, int k, std::size_t pos, std::size_t j,
             std::set<std::pair<int, std::size_t>>& failed) {
    const auto& rhs = cfg_.productions[raw.prod].rhs;
    if (k == static_cast<int>(rhs.size())) return pos == j;
    if (failed.count({k, pos})) return false;
    const auto& sym = rhs[k];
    auto attempt = [&](std::size_t end, int kid) {
      raw.spans.emplace_back(pos, end);
      raw.kids.push_back(kid);
      if (match(raw, k + 1, end, j, failed)) return true;
      raw.spans.pop_back();
      raw.kids.pop_back();
      return false;
    };
    switch (sym.kind) {
      case Cfg::Symbol::Kind::Literal:
        if (pos + sym.text.size() <= j && input_.substr(pos).starts_with(sym.text) &&
            attempt(pos + sym.text.size(), -1))
          return true;
        break;
      case Cfg::Symbol::Kind::Token:
        for (auto e : cfg_.tokens[sym.id]->match_ends(input_.substr(0, j), pos))
          if (attempt(e, -1)) return true;
        break;
      case Cfg::Symbol::Kind::Nt: {
        const auto& s = spans_[sym.id];
        for (auto it = s.lower_bound({pos, 0}); it != s.end() && it->first == pos; ++it) {
          if (it->second > j) break;
          int kid = derive(sym.id, pos, it->second);
          if (kid >= 0 && attempt(it->second, kid)) return true;
        }
        break;
      }
    }
    failed.insert({k, pos});
    return false;
  }

  int convert(int raw_index, ParseTree& tree) {
    if (auto it = converted_.find(raw_index); it != converted_.end()) return it->second;
    const Raw& raw = raws_[raw_index];
    ParseTree::Node node;
    const auto& origin = cfg_.origins[raw.nt];
    if (origin.kind == Cfg::Origin::Kind::Rule) {
      node.nt = origin.source_nt;
      node.alternative = alt_of_prod_.at(raw.prod);
    }
    node.begin = raw.spans.empty() ? 0 : raw.spans.front().first;
    node.end = raw.spans.empty() ? 0 : raw.spans.back().second;
    const auto& rhs = cfg_.productions[raw.prod].rhs;
    for (std::size_t k = 0; k < rhs.size(); ++k) {
      ParseTree::Item item;
      item.begin = raw.spans[k].first;
      item.end = raw.spans[k].second;
      if (rhs[k].kind == Cfg::Symbol::Kind::Nt) {
        int kid = raw.kids[k];
        switch (cfg_.origins[rhs[k].id].kind) {
          case Cfg::Origin::Kind::Rule:
          case Cfg::Origin::Kind::RepeatBody:
            item.child = convert(kid, tree);
            break;
          case Cfg::Origin::Kind::Optional:
            if (!raws_[kid].spans.empty()) item.child = convert(kid, tree);
            break;
          case Cfg::Origin::Kind::RepeatList:
            flatten(kid, tree, item.iterations);
            break;
        }
      }
      node.items.push_back(std::move(item));
    }
    tree.nodes.push_back(std::move(node));
    int index = static_cast<int>(tree.nodes.size()) - 1;
    converted_.emplace(raw_index, index);
    return index;
  }

  void flatten(int list_raw, ParseTree& tree, std::vector<int>& out) {
    while (list_raw >= 0) {
      const Raw& raw = raws_[list_raw];
      if (raw.kids.empty()) return;
      out.push_back(convert(raw.kids[0], tree));
      list_raw = raw.kids.size() > 1 ? raw.kids[1] : -1;
    }
  }

  const Cfg& cfg_;
  std::string_view input_;
  const std::vector<std::set<std::pair<std::size_t, std::size_t>>>& spans_;
  std::map<int, int> alt_of_prod_;
  std::vector<Raw> raws_;
  std::map<Key, int> done_;
  std::set<Key> active_;
  std::map<int, int> converted_;
};

}  // namespace

Cfg desugar(const Grammar& g, const TokenLattice& lattice) { return Desugarer(g, lattice).run(); }

bool accepts(const Cfg& cfg, std::string_view input) { return Chart(cfg, input, false).run(); }

bool accepts(const Grammar& g, std::string_view input, const TokenLattice& lattice) {
  return accepts(desugar(g, lattice), input);
}

std::optional<ParseTree> parse(const Cfg& cfg, std::string_view input) {
  Chart chart(cfg, input, true);
  if (!chart.run()) return std::nullopt;
  return TreeBuilder(cfg, input, chart.spans()).build();
}

}  // namespace grammine
