#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "grammine/derivation.hpp"
#include "grammine/subjects.hpp"

using namespace grammine;

namespace {

Grammar mine(const std::string& subject) {
  std::vector<ExecutionTrace> traces;
  for (const auto& s : SubjectRegistry::global().get(subject).samples) traces.push_back(trace_run(subject, s));
  return derive(traces).grammar;
}

std::set<std::string> referenced(const Grammar& g, const std::string& rule) {
  std::set<std::string> out;
  for (const auto& alt : g.rules.at(*g.find(rule)).alternatives)
    for (const auto& e : alt)
      if (e.kind == Element::Kind::NtRef) out.insert(g.rules.at(e.nt).name);
  return out;
}

/// A dispatcher that reads every two-byte fragment through readValue and a
/// specialized reader chosen by the first byte.
ExecutionTrace dispatch_trace(const std::string& input) {
  Tracer t(input);
  {
    Tracer::Call parse(t, "parse");
    parse.param(0, "text", t.input());
    for (std::size_t i = 0; i + 1 < input.size(); i += 2) {
      Tracer::Call value(t, "readValue");
      std::string reader = input[i] == 'a' ? "readAlpha" : input[i] == '1' ? "readNumber" : "readBlank";
      Tracer::Call inner(t, reader);
      t.touch(t.input().substr(i, 2).taint());
      inner.returns(t.input().substr(i, 2));
    }
  }
  return std::move(t).finish(Verdict::Pass);
}

}  // namespace

TEST_CASE("url sample yields the concrete url grammar") {
  auto expected = parse_grammar(
      "SPEC ::= STRING '?' QUERY '#' REF\n"
      "STRING ::= PROTOCOL '://' AUTHORITY PATH\n"
      "AUTHORITY ::= USERINFO '@' HOST ':' PORT\n"
      "PROTOCOL ::= 'http'\n"
      "USERINFO ::= 'user:pass'\n"
      "HOST ::= 'www.google.com'\n"
      "PORT ::= '80'\n"
      "PATH ::= '/command'\n"
      "QUERY ::= 'foo=bar&lorem=ipsum'\n"
      "REF ::= 'fragment'\n");
  auto g = mine("url");
  CHECK(structurally_equal(g, expected));
  CHECK(g.validate().empty());
}

TEST_CASE("a concrete grammar without repeated clusters generates only its sample") {
  auto g = mine("url");
  for (const auto& [id, rule] : g.rules) CHECK(rule.alternatives.size() == 1);
  const auto& sample = SubjectRegistry::global().get("url").samples[0];
  for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(produce(g, seed) == sample);
}

TEST_CASE("mined grammars accept their samples") {
  for (const auto& subject : SubjectRegistry::global().names()) {
    CAPTURE(subject);
    auto g = mine(subject);
    CHECK(g.validate().empty());
    for (const auto& s : SubjectRegistry::global().get(subject).samples) CHECK(accepts(g, s));
  }
}

TEST_CASE("json values become one symbol over the specialized readers") {
  auto g = mine("json");
  auto values = referenced(g, "VALUE");
  for (const char* nt : {"OBJECT", "ARRAY", "STRING", "TRUE", "FALSE", "NULL", "NUMBER"}) {
    CAPTURE(nt);
    CHECK(values.count(nt) == 1);
  }
  CHECK(serialize(g).find("TRUE ::= 'true'\n") != std::string::npos);
}

TEST_CASE("csv header and record fields share one key symbol") {
  auto g = mine("csv");
  REQUIRE(g.find("KEY").has_value());
  CHECK(referenced(g, "TOKEN").count("KEY") == 1);
  CHECK(referenced(g, "ENCAPSULATEDTOKEN").count("KEY") == 1);
}

TEST_CASE("shared call prefixes become a common symbol") {
  auto d = derive({dispatch_trace("aa11  ")});
  const auto& g = d.grammar;
  REQUIRE(g.find("VALUE").has_value());
  CHECK(referenced(g, "VALUE") == std::set<std::string>{"ALPHA", "BLANK", "NUMBER"});
  CHECK(accepts(g, "aa11  "));
  CHECK(accepts(g, "  aa11"));
}

TEST_CASE("names come from the most frequent long identifier") {
  CHECK(propose_name({{"parsePort", 1}, {"getPort", 1}, {"port", 1}}) == "PORT");
  CHECK(propose_name({{"readValue", 1}}) == "VALUE");
  CHECK(propose_name({{"host", 2}, {"hostName", 1}}) == "HOST");
  CHECK(propose_name({}).empty());
}
