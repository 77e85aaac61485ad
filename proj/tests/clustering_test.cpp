#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "grammine/clustering.hpp"

using namespace grammine;

namespace {

Block chain(std::vector<std::string> methods) {
  Block b;
  b.kind = BlockKind::CallChain;
  b.methods = std::move(methods);
  return b;
}

Block value(BlockKind kind, std::string name) {
  Block b;
  b.kind = kind;
  b.name = std::move(name);
  return b;
}

Block param(std::string method, int index, std::string name) {
  Block b;
  b.kind = BlockKind::Param;
  b.method = std::move(method);
  b.index = index;
  b.name = std::move(name);
  return b;
}

Block ret(std::string method) {
  Block b;
  b.kind = BlockKind::Return;
  b.method = std::move(method);
  return b;
}

IntervalNode node(std::size_t lo, std::size_t hi, std::vector<Block> blocks, std::vector<IntervalNode> children = {}) {
  return {{lo, hi}, std::move(blocks), std::move(children)};
}

}  // namespace

TEST_CASE("block similarity compares the identifying fields of each kind") {
  CHECK(block_similar(chain({"a", "b"}), chain({"a", "b"})));
  CHECK_FALSE(block_similar(chain({"a", "b"}), chain({"a"})));
  CHECK(block_similar(param("m", 0, "x"), param("m", 0, "y")));
  CHECK_FALSE(block_similar(param("m", 0, "x"), param("m", 1, "x")));
  CHECK(block_similar(ret("m"), ret("m")));
  CHECK_FALSE(block_similar(value(BlockKind::FieldStore, "f"), value(BlockKind::FieldLoad, "f")));
  CHECK(block_prefix_similar(chain({"a", "b"}), chain({"a"})));
  CHECK_FALSE(block_prefix_similar(chain({"a", "b"}), chain({"b"})));
  CHECK_FALSE(block_prefix_similar(chain({}), chain({"a"})));
}

TEST_CASE("similarity averages both directions over the first blocks") {
  std::vector<Block> a{chain({"f"}), value(BlockKind::FieldStore, "x"), value(BlockKind::FieldStore, "y")};
  std::vector<Block> b{chain({"f"}), value(BlockKind::FieldStore, "x"), value(BlockKind::FieldLoad, "z"),
                       param("g", 0, "p"), ret("g")};
  // a -> b: 2 of 3 found; b -> a: 2 of 5 found.
  CHECK(similarity(a, b, 15) == doctest::Approx((2.0 / 3 + 2.0 / 5) / 2));
  CHECK(similarity(a, b, 15) == similarity(b, a, 15));
  // Only the first two blocks of each side count.
  CHECK(similarity(a, b, 2) == doctest::Approx(1.0));
  CHECK(similarity(a, a, 15) == doctest::Approx(1.0));
  CHECK(similarity({}, a, 15) == doctest::Approx(0.0));

  std::vector<Block> c{chain({"f", "g"})};
  std::vector<Block> d{chain({"f"}), ret("h")};
  CHECK(prefix_similarity(c, d, 15) == doctest::Approx((1.0 + 0.5) / 2));
  CHECK(directed_prefix_similarity(c, d, 15) == doctest::Approx(1.0));
  CHECK(directed_prefix_similarity(d, c, 15) == doctest::Approx(0.5));
  CHECK(similarity(c, d, 15) == doctest::Approx(0.0));
}

TEST_CASE("clustering groups similar nodes and keeps single characters apart") {
  // "ab;cd;e" parsed by a record rule with two fields and a trailing byte.
  auto tree = node(0, 6, {chain({"parse"})},
                   {node(0, 1, {chain({"field"}), value(BlockKind::FieldStore, "f")}),
                    node(3, 4, {chain({"field"}), value(BlockKind::FieldStore, "f")}),
                    node(6, 6, {chain({"field"}), value(BlockKind::FieldStore, "f")})});
  auto other = node(0, 1, {chain({"parse"})}, {node(0, 0, {value(BlockKind::FieldStore, "g")})});
  auto forest = Forest::from_trees({tree, other}, {"ab;cd;e", "xy"});
  REQUIRE(forest.nodes.size() == 6);
  CHECK(forest.text(1) == "ab");
  CHECK(forest.text(5) == "x");
  CHECK(forest.preorder() == std::vector<int>{0, 1, 2, 3, 4, 5});

  auto c = cluster_nodes(forest);
  REQUIRE(c.complex.size() == 2);
  CHECK(c.complex[0].representative == 0);
  CHECK(c.complex[0].members == std::vector<int>{0, 4});
  CHECK(c.complex[1].members == std::vector<int>{1, 2});
  REQUIRE(c.single_char.size() == 2);
  CHECK(c.single_char[0].members == std::vector<int>{3});
  CHECK(c.single_char[1].members == std::vector<int>{5});
  CHECK(c.complex_of(2) == 1);
  CHECK_FALSE(c.complex_of(3).has_value());

  ClusterConfig strict;
  strict.threshold = 1.01;
  CHECK(cluster_nodes(forest, strict).complex.size() == 4);
}
