#include "grammine/clustering.hpp"

#include <algorithm>
#include <functional>

namespace grammine {

Forest Forest::from_trees(const std::vector<IntervalNode>& trees, std::vector<std::string> inputs) {
  Forest f;
  f.inputs = std::move(inputs);
  std::function<int(const IntervalNode&, int, std::optional<int>)> add =
      [&](const IntervalNode& n, int tree, std::optional<int> parent) {
        int id = static_cast<int>(f.nodes.size());
        f.nodes.push_back({tree, n.interval, n.blocks, {}, parent});
        for (const auto& c : n.children) {
          int cid = add(c, tree, id);
          f.nodes[id].children.push_back(cid);
        }
        return id;
      };
  for (std::size_t t = 0; t < trees.size(); ++t) f.roots.push_back(add(trees[t], static_cast<int>(t), {}));
  return f;
}

std::string_view Forest::text(int node) const {
  const auto& n = nodes[node];
  return std::string_view(inputs[n.tree]).substr(n.interval.lo, n.interval.length());
}

std::vector<int> Forest::preorder() const {
  std::vector<int> out;
  std::function<void(int)> walk = [&](int id) {
    out.push_back(id);
    for (int c : nodes[id].children) walk(c);
  };
  for (int r : roots) walk(r);
  return out;
}

std::optional<int> Clustering::complex_of(int node) const {
  for (std::size_t i = 0; i < complex.size(); ++i)
    if (std::find(complex[i].members.begin(), complex[i].members.end(), node) != complex[i].members.end())
      return static_cast<int>(i);
  return std::nullopt;
}

bool block_similar(const Block& a, const Block& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case BlockKind::CallChain: return a.methods == b.methods;
    case BlockKind::Param: return a.method == b.method && a.index == b.index;
    case BlockKind::Return: return a.method == b.method;
    default: return a.name == b.name;
  }
}

bool block_prefix_similar(const Block& a, const Block& b) {
  if (a.kind != BlockKind::CallChain || b.kind != BlockKind::CallChain) return block_similar(a, b);
  auto n = std::min(a.methods.size(), b.methods.size());
  return n > 0 && std::equal(a.methods.begin(), a.methods.begin() + static_cast<long>(n), b.methods.begin());
}

namespace {

using BlockMatch = bool (*)(const Block&, const Block&);

double directed(const std::vector<Block>& from, const std::vector<Block>& to, int limit, BlockMatch match) {
  auto considered = std::min(from.size(), static_cast<std::size_t>(limit));
  if (considered == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < considered; ++i)
    if (std::any_of(to.begin(), to.end(), [&](const Block& b) { return match(from[i], b); })) ++hits;
  return static_cast<double>(hits) / static_cast<double>(considered);
}

void cluster_greedy(const Forest& forest, const std::vector<int>& order, double threshold, int limit,
                    std::vector<Cluster>& out) {
  for (int id : order) {
    const auto& blocks = forest.nodes[id].blocks;
    auto it = std::find_if(out.begin(), out.end(), [&](const Cluster& c) {
      return similarity(forest.nodes[c.representative].blocks, blocks, limit) >= threshold;
    });
    if (it == out.end())
      out.push_back({id, {id}});
    else
      it->members.push_back(id);
  }
}

}  // namespace

double similarity(const std::vector<Block>& a, const std::vector<Block>& b, int limit) {
  return (directed(a, b, limit, block_similar) + directed(b, a, limit, block_similar)) / 2;
}

double prefix_similarity(const std::vector<Block>& a, const std::vector<Block>& b, int limit) {
  return (directed(a, b, limit, block_prefix_similar) + directed(b, a, limit, block_prefix_similar)) / 2;
}

double directed_prefix_similarity(const std::vector<Block>& from, const std::vector<Block>& to,
                                  int limit) {
  return directed(from, to, limit, block_prefix_similar);
}

Clustering cluster_nodes(const Forest& forest, const ClusterConfig& config) {
  Clustering out;
  out.config = config;
  std::vector<int> complex_order;
  std::vector<int> single_order;
  for (int id : forest.preorder()) {
    if (forest.nodes[id].blocks.empty())
      out.blockless.push_back(id);
    else if (forest.single_char(id) && forest.nodes[id].parent)
      single_order.push_back(id);
    else
      complex_order.push_back(id);
  }
  cluster_greedy(forest, complex_order, config.threshold, config.limit, out.complex);
  cluster_greedy(forest, single_order, config.threshold, config.limit, out.single_char);
  return out;
}

}  // namespace grammine
