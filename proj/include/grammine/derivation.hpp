#pragma once

#include <map>
#include <string>
#include <vector>

#include "grammine/clustering.hpp"
#include "grammine/grammar.hpp"
#include "grammine/trace.hpp"

namespace grammine {

/// State shared by the derivation steps. Complex cluster i is realized as
/// nonterminal `symbols[i]` of `grammar`.
struct Derivation {
  Forest forest;
  Clustering clustering;
  Grammar grammar;
  std::vector<int> symbols;
  /// Set when roots of different trees fell into different clusters.
  bool multiple_root_clusters = false;
};

/// Splits nodes whose first call chains share a prefix with another
/// cluster's, so that the shared prefix becomes its own cluster.
void split_common_prefixes(Derivation& d);

/// One nonterminal per complex cluster; replaces `d.grammar` and `d.symbols`.
void derive_productions(Derivation& d);

/// Unions clusters whose representatives start with the same block or are
/// prefix-similar, then derives the productions again.
void merge_symbols(Derivation& d);

/// Moves single-character nodes into the complex cluster they resemble,
/// then derives the productions again.
void lift_single_chars(Derivation& d);

/// Names used to label a cluster, with multiplicity.
std::map<std::string, int> name_bag(const Derivation& d, int cluster);
/// Upper-cased name proposal for a bag; empty when the bag is.
std::string propose_name(const std::map<std::string, int>& bag);
void name_nonterminals(Derivation& d);

/// The full mining pipeline from execution traces of accepted samples.
Derivation derive(const std::vector<ExecutionTrace>& traces, const ClusterConfig& config = {});

}  // namespace grammine
