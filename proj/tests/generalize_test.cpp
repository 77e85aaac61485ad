#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "url_queries.hpp"

using namespace grammine;
using namespace grammine::testing;

namespace {

const std::string& url_sample() { return SubjectRegistry::global().get("url").samples[0]; }

/// Membership by regular expression, without traces.
class RegexOracle : public Oracle {
 public:
  explicit RegexOracle(const std::string& re) : re_(re) {}
  Verdict accepts(std::string_view input) override {
    ++calls;
    return std::regex_match(std::string(input), re_) ? Verdict::Pass : Verdict::Fail;
  }
  int calls = 0;

 private:
  std::regex re_;
};

}  // namespace

TEST_CASE("url grammar generalizes to the expected abstract grammar") {
  SubjectOracle oracle("url");
  Learner learner(oracle, {url_sample()});
  auto g = generalize(mine_subject("url"), learner);
  CAPTURE(serialize(g));
  CHECK(structurally_equal(g, parse_grammar(kUrlGeneral)));
  CHECK(learner.rejected_commits() == 0);
  CHECK_FALSE(learner.budget().exhausted());
}

TEST_CASE("url token queries reach the expected verdicts") {
  SubjectOracle oracle("url");
  Learner learner(oracle, {url_sample()});
  generalize(mine_subject("url"), learner);
  for (const auto& row : kTokenRows) {
    CAPTURE(row.row);
    CHECK(token_verdict(learner.log(), row) == row.verdict);
  }
  for (const auto& row : kOmissionRows) {
    CAPTURE(row.row);
    CHECK(omission_verdict(learner.log(), row) == row.verdict);
  }
}

TEST_CASE("data-flow equivalence compares where preserved fragments end up") {
  auto base = trace_run("url", "http://a:80/p");
  // Same structure, different path byte.
  auto same = trace_run("url", "http://a:80/q");
  CHECK(dataflow_equivalent(base, same, {{{7, 7}, {7, 7}}, {{9, 10}, {9, 10}}}));
  // Without ':' the port digits are read as part of the host.
  auto merged = trace_run("url", "http://a80/p");
  REQUIRE(merged.verdict == Verdict::Pass);
  CHECK_FALSE(dataflow_equivalent(base, merged, {{{9, 10}, {8, 9}}}));
  // The host alone is still a host.
  CHECK(dataflow_equivalent(base, merged, {{{0, 6}, {0, 6}}}));
}

TEST_CASE("replaced fragments must keep their inner data flow") {
  auto base = trace_run("csv", "a;b\nc;d");
  REQUIRE(base.verdict == Verdict::Pass);
  // Replacing the key "b" by "x y" keeps one field; by "x;y" splits it.
  auto one = trace_run("csv", "a;x y\nc;d");
  auto two = trace_run("csv", "a;x;y\nc;d");
  std::vector<RegionPair> rest{{{0, 1}, {0, 1}}};
  CHECK(dataflow_equivalent(base, one, rest, RegionPair{{2, 2}, {2, 4}}));
  CHECK_FALSE(dataflow_equivalent(base, two, rest, RegionPair{{2, 2}, {2, 4}}));
}

TEST_CASE("queries are cached and counted against the budget") {
  RegexOracle oracle("a+b");
  QueryBudget budget;
  budget.max_queries = 3;
  Learner learner(oracle, {"aab"}, TokenLattice::standard(), budget);
  CHECK(learner.budget().used == 1);
  CHECK(learner.membership_query("ab", 0, {}, "t") == Verdict::Pass);
  CHECK(learner.membership_query("ab", 0, {}, "t") == Verdict::Pass);
  CHECK(learner.budget().used == 2);
  CHECK(oracle.calls == 2);
  CHECK(learner.membership_query("b", 0, {}, "t") == Verdict::Fail);
  CHECK(learner.budget().exhausted());
  CHECK_THROWS_AS(learner.membership_query("bb", 0, {}, "t"), BudgetExhausted);
  CHECK(learner.log().size() == 4);
}

TEST_CASE("an exhausted budget returns the grammar learned so far") {
  SubjectOracle oracle("url");
  QueryBudget budget;
  budget.max_queries = 10;
  Learner learner(oracle, {url_sample()}, TokenLattice::standard(), budget);
  auto g = generalize(mine_subject("url"), learner);
  CHECK(learner.budget().exhausted());
  CHECK(learner.budget().used == 10);
  CHECK(accepts(g, url_sample()));
  CHECK_FALSE(structurally_equal(g, parse_grammar(kUrlGeneral)));
  CHECK(g.validate().empty());
}

TEST_CASE("commits that lose a sample are rejected") {
  RegexOracle oracle("a+b");
  Learner learner(oracle, {"aab"});
  auto g = parse_grammar("S ::= A A 'b'\nA ::= 'a'");
  CHECK_FALSE(learner.commit(g, parse_grammar("S ::= A 'b'\nA ::= 'a'"), "drop"));
  CHECK(learner.rejected_commits() == 1);
  CHECK(serialize(g) == "S ::= A A 'b'\nA ::= 'a'\n");
  CHECK(learner.commit(g, parse_grammar("S ::= (A)+ 'b'\nA ::= 'a'"), "repeat"));
  CHECK(learner.commits() == 1);
}

TEST_CASE("generalization without traces still finds repetitions and tokens") {
  RegexOracle oracle("a+;[0-9]+");
  Learner learner(oracle, {"aaa;42"});
  auto g = generalize(parse_grammar("S ::= A A A ';' N\nA ::= 'a'\nN ::= '42'"), learner);
  CAPTURE(serialize(g));
  CHECK(accepts(g, "aaa;42"));
  CHECK(accepts(g, "a;7"));
  CHECK(accepts(g, "aaaaaaa;0815"));
  CHECK_FALSE(accepts(g, ";1"));
  for (std::uint64_t seed = 0; seed < 100; ++seed) CHECK(oracle.accepts(produce(g, seed)) == Verdict::Pass);
}

TEST_CASE("every committed grammar keeps the samples and extends the previous language") {
  SubjectOracle oracle("url");
  Learner learner(oracle, {url_sample()});
  std::vector<Grammar> steps{mine_subject("url")};
  learner.on_commit = [&](const Grammar& g, const std::string&) { steps.push_back(g); };
  generalize(steps.front(), learner);
  REQUIRE(steps.size() > 2);
  for (std::size_t i = 1; i < steps.size(); ++i) {
    CAPTURE(i);
    CHECK(accepts(steps[i], url_sample()));
    auto cfg = desugar(steps[i]);
    for (std::uint64_t seed = 0; seed < 30; ++seed) CHECK(accepts(cfg, produce(steps[i - 1], seed)));
  }
}

TEST_CASE("query log round-trips") {
  SubjectOracle oracle("url");
  Learner learner(oracle, {url_sample()});
  generalize(mine_subject("url"), learner);
  std::ostringstream out;
  write_query_log(out, learner.log());
  auto back = parse_query_log(out.str());
  REQUIRE(back.size() == learner.log().size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].n == learner.log()[i].n);
    CHECK(back[i].input == learner.log()[i].input);
    CHECK(back[i].verdict == learner.log()[i].verdict);
    CHECK(back[i].purpose == learner.log()[i].purpose);
  }
  CHECK(back.front().input == url_sample());
  CHECK_THROWS(parse_query_log("Q x PASS p 00\n"));
}
