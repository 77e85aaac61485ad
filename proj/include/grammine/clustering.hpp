#pragma once

#include <optional>
#include <string>
#include <vector>

#include "grammine/interval_tree.hpp"

namespace grammine {

/// Interval trees of several samples flattened into one arena. Node ids follow
/// tree index, then pre-order, at construction time.
struct Forest {
  struct Node {
    int tree = 0;
    Interval interval;
    std::vector<Block> blocks;
    std::vector<int> children;
    std::optional<int> parent;
  };

  std::vector<std::string> inputs;
  std::vector<Node> nodes;
  std::vector<int> roots;

  static Forest from_trees(const std::vector<IntervalNode>& trees, std::vector<std::string> inputs);

  std::string_view text(int node) const;
  bool single_char(int node) const { return nodes[node].interval.lo == nodes[node].interval.hi; }
  /// Node ids of every tree in pre-order.
  std::vector<int> preorder() const;
};

struct ClusterConfig {
  int limit = 15;
  double threshold = 0.9;
};

struct Cluster {
  int representative = 0;
  std::vector<int> members;
};

struct Clustering {
  std::vector<Cluster> complex;
  std::vector<Cluster> single_char;
  /// Nodes without blocks; they are treated as plain text.
  std::vector<int> blockless;
  ClusterConfig config;

  /// Index into `complex` for a node, if it is in a complex cluster.
  std::optional<int> complex_of(int node) const;
};

bool block_similar(const Block& a, const Block& b);
/// Like block_similar, but call chains also match when one is a prefix of the other.
bool block_prefix_similar(const Block& a, const Block& b);

double similarity(const std::vector<Block>& a, const std::vector<Block>& b, int limit);
double prefix_similarity(const std::vector<Block>& a, const std::vector<Block>& b, int limit);
/// One-directional: how many of the first `limit` blocks of `from` find a
/// prefix-similar block in `to`.
double directed_prefix_similarity(const std::vector<Block>& from, const std::vector<Block>& to,
                                  int limit);

/// Greedy clustering; complex and single-character nodes are clustered
/// separately so that one kind never represents the other.
Clustering cluster_nodes(const Forest& forest, const ClusterConfig& config = {});

}  // namespace grammine
