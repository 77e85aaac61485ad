#include "grammine/interval_tree.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace grammine {

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::CallChain: return "chain";
    case BlockKind::Param: return "param";
    case BlockKind::Return: return "return";
    case BlockKind::FieldLoad: return "fload";
    case BlockKind::FieldStore: return "fstore";
    case BlockKind::ArrayLoad: return "aload";
    case BlockKind::ArrayStore: return "astore";
  }
  return "?";
}

std::string Block::summary() const {
  std::string out(to_string(kind));
  out += ':';
  switch (kind) {
    case BlockKind::CallChain:
      for (std::size_t i = 0; i < methods.size(); ++i) {
        if (i) out += '.';
        out += methods[i];
      }
      break;
    case BlockKind::Param:
      out += method + "#" + std::to_string(index) + ":" + name;
      break;
    case BlockKind::Return:
      out += method;
      break;
    default:
      out += name;
  }
  return out;
}

std::size_t IntervalNode::size() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.size();
  return n;
}

namespace {

Interval hull(const TaintSet& t) { return {t.min(), t.max()}; }

struct CallInfo {
  std::string method;
  std::optional<std::int64_t> parent;
  std::uint64_t enter_seq = 0;
  TaintSet taint;
  std::vector<std::int64_t> children;
};

class BlockBuilder {
 public:
  explicit BlockBuilder(const ExecutionTrace& trace) : trace_(trace) {}

  std::vector<Block> run() {
    collect_calls();
    for (auto& [id, info] : calls_) {
      if (info.taint.empty()) continue;
      if (info.parent) {
        auto p = calls_.find(*info.parent);
        if (p != calls_.end() && !p->second.taint.empty() &&
            hull(p->second.taint) == hull(info.taint))
          continue;
      }
      std::vector<std::int64_t> chain;
      emit_chains(id, chain, info);
    }
    for (const auto& e : trace_.events) emit_value(e);
    std::stable_sort(out_.begin(), out_.end(),
                     [](const Block& a, const Block& b) { return a.pre_order < b.pre_order; });
    return std::move(out_);
  }

 private:
  void collect_calls() {
    for (const auto& e : trace_.events) {
      if (e.kind == EventKind::CallEnter) {
        auto& info = calls_[e.call_id];
        info.method = e.name;
        info.parent = e.parent_call_id;
        info.enter_seq = e.seq;
        if (e.parent_call_id) calls_[*e.parent_call_id].children.push_back(e.call_id);
      } else if (e.kind != EventKind::CallExit) {
        calls_[e.call_id].taint.merge(e.taint);
      }
    }
    // Ids grow with creation order, so children are folded into parents first.
    for (auto it = calls_.rbegin(); it != calls_.rend(); ++it) {
      if (!it->second.parent) continue;
      auto p = calls_.find(*it->second.parent);
      if (p != calls_.end()) p->second.taint.merge(it->second.taint);
    }
  }

  void emit_chains(std::int64_t id, std::vector<std::int64_t>& chain, const CallInfo& head) {
    chain.push_back(id);
    const auto& info = calls_.at(id);
    auto iv = hull(info.taint);
    bool extended = false;
    for (auto child : info.children) {
      const auto& c = calls_.at(child);
      if (c.taint.empty() || hull(c.taint) != iv) continue;
      extended = true;
      emit_chains(child, chain, head);
    }
    if (!extended) {
      Block b;
      b.kind = BlockKind::CallChain;
      for (auto cid : chain) b.methods.push_back(calls_.at(cid).method);
      b.interval = iv;
      b.pre_order = head.enter_seq;
      b.call_ids = chain;
      b.caller = head.parent;
      out_.push_back(std::move(b));
    }
    chain.pop_back();
  }

  void emit_value(const TraceEvent& e) {
    Block b;
    switch (e.kind) {
      case EventKind::ParamBind: {
        b.kind = BlockKind::Param;
        auto first = e.name.find(':');
        auto second = e.name.find(':', first + 1);
        b.method = e.name.substr(0, first);
        b.index = std::stoi(e.name.substr(first + 1, second - first - 1));
        b.name = e.name.substr(second + 1);
        b.caller = e.parent_call_id;
        break;
      }
      case EventKind::ReturnValue:
        b.kind = BlockKind::Return;
        b.method = e.name;
        b.caller = e.parent_call_id;
        break;
      case EventKind::FieldLoad: b.kind = BlockKind::FieldLoad; break;
      case EventKind::FieldStore: b.kind = BlockKind::FieldStore; break;
      case EventKind::ArrayLoad: b.kind = BlockKind::ArrayLoad; break;
      case EventKind::ArrayStore: b.kind = BlockKind::ArrayStore; break;
      default: return;
    }
    if (!e.taint.is_consecutive()) return;
    if (b.kind != BlockKind::Param && b.kind != BlockKind::Return) {
      b.name = e.name;
      b.caller = e.call_id;
    }
    b.interval = hull(e.taint);
    b.pre_order = e.seq;
    b.call_ids = {e.call_id};
    out_.push_back(std::move(b));
  }

  const ExecutionTrace& trace_;
  std::map<std::int64_t, CallInfo> calls_;
  std::vector<Block> out_;
};

struct Flat {
  Interval interval;
  std::vector<Block> blocks;
};

void merge_blocks(std::vector<Block>& into, std::vector<Block> from) {
  into.insert(into.end(), std::make_move_iterator(from.begin()), std::make_move_iterator(from.end()));
  std::stable_sort(into.begin(), into.end(),
                   [](const Block& a, const Block& b) { return a.pre_order < b.pre_order; });
}

void flatten(IntervalNode& node, std::vector<Flat>& out) {
  if (node.interval.empty()) return;
  out.push_back({node.interval, std::move(node.blocks)});
  for (auto& c : node.children) flatten(c, out);
}

/// Nests intervals by containment. Equal intervals are merged; a node that
/// partially overlaps the open chain closes it.
std::optional<IntervalNode> nest(std::vector<Flat> flat) {
  std::stable_sort(flat.begin(), flat.end(), [](const Flat& a, const Flat& b) {
    if (a.interval.lo != b.interval.lo) return a.interval.lo < b.interval.lo;
    return a.interval.hi > b.interval.hi;
  });
  std::vector<Flat> merged;
  for (auto& f : flat) {
    if (!merged.empty() && merged.back().interval == f.interval)
      merge_blocks(merged.back().blocks, std::move(f.blocks));
    else
      merged.push_back(std::move(f));
  }
  if (merged.empty()) return std::nullopt;

  IntervalNode root{merged[0].interval, std::move(merged[0].blocks), {}};
  std::vector<IntervalNode*> stack{&root};
  for (std::size_t i = 1; i < merged.size(); ++i) {
    const auto iv = merged[i].interval;
    while (stack.size() > 1 && !stack.back()->interval.contains(iv)) stack.pop_back();
    if (!stack.back()->interval.contains(iv)) return std::nullopt;
    auto& parent = *stack.back();
    parent.children.push_back({iv, std::move(merged[i].blocks), {}});
    stack.push_back(&parent.children.back());
  }
  return root;
}

void clip(IntervalNode& node, const Interval& range) {
  node.interval.lo = std::max(node.interval.lo, range.lo);
  node.interval.hi = std::min(node.interval.hi, range.hi);
  if (node.interval.empty()) {
    node.interval = {1, 0};
    node.blocks.clear();
  }
  for (auto& c : node.children) clip(c, range);
}

std::uint64_t latest(const IntervalNode& n) {
  std::uint64_t out = 0;
  for (const auto& b : n.blocks) out = std::max(out, b.pre_order);
  return out;
}

/// Resolves the first partially overlapping sibling pair in pre-order.
bool resolve_first(IntervalNode& node) {
  auto& kids = node.children;
  for (std::size_t i = 0; i < kids.size(); ++i) {
    for (std::size_t j = i + 1; j < kids.size(); ++j) {
      auto& a = kids[i];
      auto& b = kids[j];
      if (!a.interval.partially_overlaps(b.interval)) continue;
      if (latest(a) > latest(b))
        clip(b, {a.interval.hi + 1, b.interval.hi});
      else
        clip(a, {a.interval.lo, b.interval.lo - 1});
      return true;
    }
  }
  for (auto& c : kids)
    if (resolve_first(c)) return true;
  return false;
}

IntervalNode renest(IntervalNode tree) {
  std::vector<Flat> flat;
  flatten(tree, flat);
  auto out = nest(std::move(flat));
  if (!out) throw NoRootInterval("tree lost its root interval");
  return std::move(*out);
}

void dump_into(const IntervalNode& n, int depth, std::ostringstream& out) {
  out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << '[' << n.interval.lo << ','
      << n.interval.hi << "] {";
  for (std::size_t i = 0; i < n.blocks.size(); ++i) {
    if (i) out << ", ";
    out << n.blocks[i].summary();
  }
  out << "}\n";
  for (const auto& c : n.children) dump_into(c, depth + 1, out);
}

void collect(const IntervalNode& n, std::vector<Interval>& out) {
  out.push_back(n.interval);
  for (const auto& c : n.children) collect(c, out);
}

}  // namespace

std::vector<Block> build_blocks(const ExecutionTrace& trace) { return BlockBuilder(trace).run(); }

IntervalNode build_tree(const std::vector<Block>& blocks, std::size_t input_len) {
  if (input_len == 0) throw NoRootInterval("empty input has no root interval");
  const Interval whole{0, input_len - 1};
  std::vector<Flat> flat;
  bool has_root = false;
  for (const auto& b : blocks) {
    if (b.interval.lo > whole.hi || b.interval.hi > whole.hi) continue;
    has_root = has_root || b.interval == whole;
    flat.push_back({b.interval, {b}});
  }
  if (!has_root) throw NoRootInterval("no block covers the whole input");
  auto tree = nest(std::move(flat));
  if (!tree) throw NoRootInterval("no block covers the whole input");
  return std::move(*tree);
}

IntervalNode resolve_overlap(IntervalNode tree) {
  while (resolve_first(tree)) tree = renest(std::move(tree));
  return tree;
}

IntervalNode fix_last_leaf(IntervalNode tree) {
  std::vector<IntervalNode*> path{&tree};
  while (!path.back()->children.empty()) path.push_back(&path.back()->children.back());
  if (path.size() < 3) return tree;
  const auto leaf_iv = path.back()->interval;

  std::set<std::int64_t> callers;
  for (const auto& b : path.back()->blocks)
    if (b.kind == BlockKind::CallChain && b.caller) callers.insert(*b.caller);

  std::optional<std::size_t> target;
  for (std::size_t k = path.size() - 1; k-- > 0;) {
    if (path[k]->interval.hi != leaf_iv.hi || path[k]->interval.lo >= leaf_iv.lo) break;
    bool calls_leaf = std::any_of(path[k]->blocks.begin(), path[k]->blocks.end(), [&](const Block& b) {
      return b.kind == BlockKind::CallChain &&
             std::any_of(b.call_ids.begin(), b.call_ids.end(),
                         [&](std::int64_t id) { return callers.count(id) > 0; });
    });
    if (calls_leaf) {
      target = k;
      break;
    }
  }
  if (!target || *target == path.size() - 2) return tree;

  IntervalNode leaf = std::move(*path.back());
  path[path.size() - 2]->children.pop_back();
  for (std::size_t k = *target + 1; k + 1 < path.size(); ++k) {
    if (path[k]->interval.lo >= leaf_iv.lo) {
      clip(*path[k], {1, 0});
    } else {
      clip(*path[k], {path[k]->interval.lo, leaf_iv.lo - 1});
    }
  }
  path[*target]->children.push_back(std::move(leaf));
  return renest(std::move(tree));
}

IntervalNode interval_tree(const ExecutionTrace& trace) {
  auto tree = build_tree(build_blocks(trace), trace.input.size());
  return fix_last_leaf(resolve_overlap(std::move(tree)));
}

std::string dump(const IntervalNode& tree) {
  std::ostringstream out;
  dump_into(tree, 0, out);
  return out.str();
}

std::vector<std::pair<Interval, Interval>> overlapping_pairs(const IntervalNode& tree) {
  std::vector<Interval> all;
  collect(tree, all);
  std::vector<std::pair<Interval, Interval>> out;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      if (all[i].partially_overlaps(all[j])) out.emplace_back(all[i], all[j]);
  return out;
}

}  // namespace grammine
