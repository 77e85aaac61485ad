#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "grammine/trace.hpp"

namespace grammine {

/// Inclusive byte range. An interval with lo > hi is empty.
struct Interval {
  std::size_t lo = 0;
  std::size_t hi = 0;

  bool empty() const { return lo > hi; }
  std::size_t length() const { return empty() ? 0 : hi - lo + 1; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
  /// True when the two overlap without either containing the other.
  bool partially_overlaps(const Interval& o) const {
    return intersects(o) && !contains(o) && !o.contains(*this);
  }

  bool operator==(const Interval&) const = default;
  std::strong_ordering operator<=>(const Interval& o) const {
    if (auto c = lo <=> o.lo; c != 0) return c;
    return hi <=> o.hi;
  }
};

enum class BlockKind { CallChain, Param, Return, FieldLoad, FieldStore, ArrayLoad, ArrayStore };

std::string_view to_string(BlockKind kind);

struct Block {
  BlockKind kind = BlockKind::CallChain;
  /// Call chain methods, outermost first. Empty for value blocks.
  std::vector<std::string> methods;
  /// Method for Param and Return.
  std::string method;
  int index = -1;
  /// Parameter name for Param, field or array name for loads and stores.
  std::string name;
  Interval interval;
  std::uint64_t pre_order = 0;
  std::vector<std::int64_t> call_ids;
  /// Call that invoked the chain head, or the call that emitted a value event.
  std::optional<std::int64_t> caller;

  std::string summary() const;
  bool operator==(const Block&) const = default;
};

struct IntervalNode {
  Interval interval;
  std::vector<Block> blocks;
  std::vector<IntervalNode> children;

  bool is_leaf() const { return children.empty(); }
  std::size_t size() const;
};

class NoRootInterval : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Method intervals are the hull of all taint seen in a call's subtree.
std::vector<Block> build_blocks(const ExecutionTrace& trace);

IntervalNode build_tree(const std::vector<Block>& blocks, std::size_t input_len);

IntervalNode resolve_overlap(IntervalNode tree);

IntervalNode fix_last_leaf(IntervalNode tree);

/// build_blocks, build_tree, resolve_overlap and fix_last_leaf in sequence.
IntervalNode interval_tree(const ExecutionTrace& trace);

/// Indented text, one node per line: `[lo,hi] {block, block}`.
std::string dump(const IntervalNode& tree);

/// Every pair of nodes that partially overlap, in pre-order.
std::vector<std::pair<Interval, Interval>> overlapping_pairs(const IntervalNode& tree);

}  // namespace grammine
