#include "grammine/derivation.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace grammine {

namespace {

const Block* first_block(const Forest& f, int node) {
  const auto& blocks = f.nodes[node].blocks;
  return blocks.empty() ? nullptr : &blocks.front();
}

std::size_t common_prefix(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t n = 0;
  while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
  return n;
}

bool starts_with(const std::vector<std::string>& chain, const std::vector<std::string>& prefix) {
  return chain.size() > prefix.size() && common_prefix(chain, prefix) == prefix.size();
}

/// Finds a prefix shared by the first call chains of two cluster representatives.
std::optional<std::vector<std::string>> shared_prefix(const Derivation& d) {
  const auto& cs = d.clustering.complex;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const Block* a = first_block(d.forest, cs[i].representative);
    if (!a || a->kind != BlockKind::CallChain) continue;
    for (std::size_t j = i + 1; j < cs.size(); ++j) {
      const Block* b = first_block(d.forest, cs[j].representative);
      if (!b || b->kind != BlockKind::CallChain) continue;
      auto n = common_prefix(a->methods, b->methods);
      if (n >= 1 && n < a->methods.size() && n < b->methods.size())
        return std::vector<std::string>(a->methods.begin(), a->methods.begin() + static_cast<long>(n));
    }
  }
  return std::nullopt;
}

/// Turns `id` into the prefix node and returns the new node below it.
int split_node(Forest& f, int id, std::size_t n) {
  Block head = f.nodes[id].blocks.front();
  Block pre = head;
  pre.methods.resize(n);
  pre.call_ids.resize(n);
  Block post = head;
  post.methods.erase(post.methods.begin(), post.methods.begin() + static_cast<long>(n));
  post.call_ids.erase(post.call_ids.begin(), post.call_ids.begin() + static_cast<long>(n));
  post.caller = head.call_ids[n - 1];

  Forest::Node lower;
  lower.tree = f.nodes[id].tree;
  lower.interval = f.nodes[id].interval;
  lower.blocks = f.nodes[id].blocks;
  lower.blocks.front() = std::move(post);
  lower.children = std::move(f.nodes[id].children);
  lower.parent = id;
  int post_id = static_cast<int>(f.nodes.size());
  for (int c : lower.children) f.nodes[c].parent = post_id;
  f.nodes.push_back(std::move(lower));
  f.nodes[id].children = {post_id};
  f.nodes[id].blocks = {std::move(pre)};
  return post_id;
}

constexpr std::size_t kMinNameLength = 3;

std::string strip_prefix(const std::string& name) {
  static const char* kPrefixes[] = {"get", "set", "parse", "read", "is", "to", "next"};
  for (const char* p : kPrefixes) {
    std::string_view prefix(p);
    if (name.size() <= prefix.size()) continue;
    bool match = true;
    for (std::size_t i = 0; i < prefix.size() && match; ++i)
      match = std::tolower(static_cast<unsigned char>(name[i])) == prefix[i];
    if (!match) continue;
    char next = name[prefix.size()];
    if (std::isupper(static_cast<unsigned char>(next)) || next == '_') return name.substr(prefix.size());
  }
  return name;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    out += std::isalnum(u) ? static_cast<char>(std::toupper(u)) : '_';
  }
  if (!out.empty() && std::isdigit(static_cast<unsigned char>(out[0]))) out = "S" + out;
  return out;
}

}  // namespace

void split_common_prefixes(Derivation& d) {
  auto& cs = d.clustering.complex;
  while (auto prefix = shared_prefix(d)) {
    Cluster pre;
    std::optional<std::size_t> insert_at;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const Block* head = first_block(d.forest, cs[i].representative);
      if (!head || head->kind != BlockKind::CallChain || !starts_with(head->methods, *prefix)) continue;
      if (!insert_at) insert_at = i;
      for (auto& m : cs[i].members) {
        const Block* b = first_block(d.forest, m);
        if (!b || b->kind != BlockKind::CallChain || !starts_with(b->methods, *prefix)) continue;
        int post = split_node(d.forest, m, prefix->size());
        pre.members.push_back(m);
        if (cs[i].representative == m) cs[i].representative = post;
        m = post;
      }
    }
    pre.representative = pre.members.front();
    cs.insert(cs.begin() + static_cast<long>(*insert_at), std::move(pre));
  }
}

void derive_productions(Derivation& d) {
  const auto& f = d.forest;
  const auto& cs = d.clustering.complex;
  std::vector<int> cluster_of(f.nodes.size(), -1);
  for (std::size_t i = 0; i < cs.size(); ++i)
    for (int m : cs[i].members) cluster_of[m] = static_cast<int>(i);

  Grammar g;
  d.symbols.clear();
  for (std::size_t i = 0; i < cs.size(); ++i) d.symbols.push_back(g.add_rule("C" + std::to_string(i)));

  auto alternative = [&](int id) {
    const auto& node = f.nodes[id];
    std::string_view input = f.inputs[node.tree];
    Alternative alt;
    std::size_t pos = node.interval.lo;
    for (int c : node.children) {
      const auto& child = f.nodes[c].interval;
      if (child.lo > pos) alt.push_back(Element::terminal(std::string(input.substr(pos, child.lo - pos))));
      if (cluster_of[c] >= 0)
        alt.push_back(Element::ref(d.symbols[cluster_of[c]]));
      else
        alt.push_back(Element::terminal(std::string(f.text(c))));
      pos = child.hi + 1;
    }
    if (pos <= node.interval.hi)
      alt.push_back(Element::terminal(std::string(input.substr(pos, node.interval.hi + 1 - pos))));
    return alt;
  };

  for (std::size_t i = 0; i < cs.size(); ++i) {
    auto& alts = g.rule(d.symbols[i]).alternatives;
    for (int m : cs[i].members) {
      auto alt = alternative(m);
      if (std::find(alts.begin(), alts.end(), alt) == alts.end()) alts.push_back(std::move(alt));
    }
  }

  d.multiple_root_clusters = false;
  if (!f.roots.empty()) {
    int start_cluster = cluster_of[f.roots.front()];
    g.start = d.symbols[start_cluster];
    for (int r : f.roots) {
      if (cluster_of[r] == start_cluster) continue;
      d.multiple_root_clusters = true;
      Alternative alt{Element::ref(d.symbols[cluster_of[r]])};
      auto& alts = g.rule(g.start).alternatives;
      if (std::find(alts.begin(), alts.end(), alt) == alts.end()) alts.push_back(std::move(alt));
    }
  }
  d.grammar = std::move(g);
}

void merge_symbols(Derivation& d) {
  auto& cs = d.clustering.complex;
  const auto& cfg = d.clustering.config;
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < cs.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < cs.size() && !merged; ++j) {
        const auto& a = d.forest.nodes[cs[i].representative].blocks;
        const auto& b = d.forest.nodes[cs[j].representative].blocks;
        if (a.empty() || b.empty()) continue;
        if (block_similar(a.front(), b.front()) || prefix_similarity(a, b, cfg.limit) >= cfg.threshold) {
          cs[i].members.insert(cs[i].members.end(), cs[j].members.begin(), cs[j].members.end());
          cs.erase(cs.begin() + static_cast<long>(j));
          merged = true;
        }
      }
    }
  }
  derive_productions(d);
}

void lift_single_chars(Derivation& d) {
  auto& cs = d.clustering.complex;
  const auto& cfg = d.clustering.config;
  for (auto& single : d.clustering.single_char) {
    std::vector<int> kept;
    for (int n : single.members) {
      char ch = d.forest.text(n)[0];
      double best = -1;
      int best_cluster = -1;
      bool unique = false;
      for (std::size_t i = 0; i < cs.size(); ++i) {
        bool occurs = std::any_of(cs[i].members.begin(), cs[i].members.end(), [&](int m) {
          return d.forest.text(m).find(ch) != std::string_view::npos;
        });
        if (!occurs) continue;
        double s = directed_prefix_similarity(d.forest.nodes[cs[i].representative].blocks,
                                              d.forest.nodes[n].blocks, cfg.limit);
        if (s > best) {
          best = s;
          best_cluster = static_cast<int>(i);
          unique = true;
        } else if (s == best) {
          unique = false;
        }
      }
      if (best_cluster >= 0 && unique && best > cfg.threshold)
        cs[best_cluster].members.push_back(n);
      else
        kept.push_back(n);
    }
    single.members = std::move(kept);
    if (!single.members.empty() &&
        std::find(single.members.begin(), single.members.end(), single.representative) == single.members.end())
      single.representative = single.members.front();
  }
  std::erase_if(d.clustering.single_char, [](const Cluster& c) { return c.members.empty(); });
  derive_productions(d);
}

std::map<std::string, int> name_bag(const Derivation& d, int cluster) {
  std::map<std::string, int> bag;
  for (int m : d.clustering.complex[cluster].members) {
    for (const auto& b : d.forest.nodes[m].blocks) {
      switch (b.kind) {
        case BlockKind::CallChain:
          for (const auto& method : b.methods) ++bag[method];
          break;
        case BlockKind::Param: ++bag[b.name]; break;
        case BlockKind::Return: ++bag[b.method]; break;
        default: ++bag[b.name];
      }
    }
  }
  bag.erase("");
  return bag;
}

std::string propose_name(const std::map<std::string, int>& bag) {
  std::map<std::string, int> names;
  for (const auto& [name, count] : bag) {
    auto s = lower(strip_prefix(name));
    if (!s.empty()) names[s] += count;
  }
  std::string best;
  int best_score = 0;
  std::set<std::string> seen;
  for (const auto& [name, count] : names) {
    // Substrings shorter than kMinNameLength only stand for whole names.
    for (std::size_t i = 0; i < name.size(); ++i) {
      for (std::size_t len = std::min(kMinNameLength, name.size()); i + len <= name.size(); ++len) {
        auto sub = name.substr(i, len);
        if (!seen.insert(sub).second) continue;
        int score = 0;
        for (const auto& [other, c] : names)
          if (other.find(sub) != std::string::npos) score += c;
        bool better = score > best_score ||
                      (score == best_score && (sub.size() > best.size() ||
                                               (sub.size() == best.size() && sub < best)));
        if (better) {
          best = sub;
          best_score = score;
        }
      }
    }
  }
  return sanitize(best);
}

void name_nonterminals(Derivation& d) {
  std::set<std::string> used;
  std::vector<std::string> proposals;
  for (std::size_t i = 0; i < d.clustering.complex.size(); ++i)
    proposals.push_back(propose_name(name_bag(d, static_cast<int>(i))));
  int unnamed = 0;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    std::string name = proposals[i];
    if (name.empty()) {
      do name = "S" + std::to_string(++unnamed);
      while (used.count(name) || std::count(proposals.begin(), proposals.end(), name));
    } else if (used.count(name)) {
      int k = 2;
      while (used.count(name + std::to_string(k))) ++k;
      name += std::to_string(k);
    }
    used.insert(name);
    d.grammar.rule(d.symbols[i]).name = name;
  }
}

Derivation derive(const std::vector<ExecutionTrace>& traces, const ClusterConfig& config) {
  std::vector<IntervalNode> trees;
  std::vector<std::string> inputs;
  for (const auto& t : traces) {
    trees.push_back(interval_tree(t));
    inputs.push_back(t.input);
  }
  Derivation d;
  d.forest = Forest::from_trees(trees, std::move(inputs));
  d.clustering = cluster_nodes(d.forest, config);
  split_common_prefixes(d);
  derive_productions(d);
  merge_symbols(d);
  lift_single_chars(d);
  name_nonterminals(d);
  return d;
}

}  // namespace grammine
