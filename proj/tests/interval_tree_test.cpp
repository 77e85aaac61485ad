#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "grammine/eval.hpp"
#include "grammine/interval_tree.hpp"
#include "grammine/subjects.hpp"

using namespace grammine;

namespace {

Block store(const std::string& name, std::size_t lo, std::size_t hi) {
  Block b;
  b.kind = BlockKind::FieldStore;
  b.name = name;
  b.interval = {lo, hi};
  return b;
}

/// Structural invariants every finished tree must satisfy.
void check_shape(const IntervalNode& node) {
  CHECK_FALSE(node.interval.empty());
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    const auto& c = node.children[i].interval;
    CHECK(node.interval.contains(c));
    if (i > 0) CHECK(node.children[i - 1].interval.hi < c.lo);
    check_shape(node.children[i]);
  }
}

std::size_t block_count(const IntervalNode& node) {
  std::size_t n = node.blocks.size();
  for (const auto& c : node.children) n += block_count(c);
  return n;
}

/// Brute-force pairwise scan, independent of overlapping_pairs.
bool any_partial_overlap(const IntervalNode& tree) {
  std::vector<Interval> all;
  std::function<void(const IntervalNode&)> walk = [&](const IntervalNode& n) {
    all.push_back(n.interval);
    for (const auto& c : n.children) walk(c);
  };
  walk(tree);
  for (const auto& a : all)
    for (const auto& b : all) {
      bool intersect = a.lo <= b.hi && b.lo <= a.hi;
      bool nested = (a.lo <= b.lo && b.hi <= a.hi) || (b.lo <= a.lo && a.hi <= b.hi);
      if (intersect && !nested) return true;
    }
  return false;
}

}  // namespace

TEST_CASE("url sample tree has the components at their offsets") {
  auto tree = interval_tree(trace_run("url", SubjectRegistry::global().get("url").samples[0]));
  CHECK(tree.interval == Interval{0, 70});
  std::map<std::string, Interval> fields;
  std::function<void(const IntervalNode&)> walk = [&](const IntervalNode& n) {
    for (const auto& b : n.blocks)
      if (b.kind == BlockKind::FieldStore) fields[b.name] = n.interval;
    for (const auto& c : n.children) walk(c);
  };
  walk(tree);
  CHECK(fields["protocol"] == Interval{0, 3});
  CHECK(fields["host"] == Interval{17, 30});
  CHECK(fields["port"] == Interval{32, 33});
  CHECK(fields["path"] == Interval{34, 41});
  CHECK(fields["query"] == Interval{43, 61});
  CHECK(fields["ref"] == Interval{63, 70});
  CHECK(overlapping_pairs(tree).empty());
}

TEST_CASE("input without a covering block has no root") {
  CHECK_THROWS_AS(build_tree({store("a", 0, 2)}, 5), NoRootInterval);
  CHECK_THROWS_AS(build_tree({}, 0), NoRootInterval);
}

TEST_CASE("partial overlaps are detected") {
  auto tree = build_tree({store("r", 0, 9), store("a", 0, 5), store("b", 3, 9)}, 10);
  CHECK(any_partial_overlap(tree));
  CHECK_FALSE(overlapping_pairs(tree).empty());
  auto fixed = resolve_overlap(tree);
  CHECK_FALSE(any_partial_overlap(fixed));
  CHECK(overlapping_pairs(fixed).empty());
}

TEST_CASE("resolving random block sets leaves no overlap and is idempotent") {
  std::mt19937_64 rng(21);
  for (int round = 0; round < 200; ++round) {
    CAPTURE(round);
    std::size_t len = 2 + rng() % 30;
    std::vector<Block> blocks{store("root", 0, len - 1)};
    int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      std::size_t lo = rng() % len;
      std::size_t hi = lo + rng() % (len - lo);
      blocks.push_back(store("f" + std::to_string(i), lo, hi));
    }
    auto tree = resolve_overlap(build_tree(blocks, len));
    CHECK(tree.interval == Interval{0, len - 1});
    CHECK_FALSE(any_partial_overlap(tree));
    CHECK(overlapping_pairs(tree).empty());
    check_shape(tree);
    CHECK(block_count(tree) == blocks.size());
    CHECK(dump(resolve_overlap(tree)) == dump(tree));
  }
}

TEST_CASE("trees of fuzzed subject runs are overlap-free") {
  std::size_t checked = 0;
  for (const auto& subject : SubjectRegistry::global().names()) {
    CAPTURE(subject);
    auto golden = load_golden(subject);
    for (std::uint64_t i = 0; i < 40; ++i) {
      auto input = produce(golden, string_seed(101, i));
      if (input.empty()) continue;
      auto t = trace_run(subject, input);
      if (t.verdict != Verdict::Pass) continue;
      CAPTURE(input);
      auto tree = interval_tree(t);
      CHECK(tree.interval == Interval{0, input.size() - 1});
      CHECK_FALSE(any_partial_overlap(tree));
      check_shape(tree);
      ++checked;
    }
  }
  CHECK(checked >= 100);
}
