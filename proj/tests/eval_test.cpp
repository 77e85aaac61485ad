#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <string>

#include "grammine/eval.hpp"

using namespace grammine;

TEST_CASE("a grammar is complete with respect to itself") {
  for (const auto& subject : SubjectRegistry::global().names()) {
    CAPTURE(subject);
    auto golden = load_golden(subject);
    auto r = completeness(golden, golden, 200, 1);
    CHECK(r.accepted == 200);
    CHECK(r.pct() == doctest::Approx(100.0));
    CHECK(r.rejected.empty());
  }
}

TEST_CASE("golden grammars are sound and accept the samples") {
  for (const auto& subject : SubjectRegistry::global().names()) {
    CAPTURE(subject);
    auto golden = load_golden(subject);
    CHECK(golden.validate().empty());
    for (const auto& s : SubjectRegistry::global().get(subject).samples) CHECK(accepts(golden, s));
    auto r = soundness(golden, subject, 300, 2);
    CAPTURE(r.rejected.empty() ? std::string() : r.rejected.front());
    CHECK(r.accepted == 300);
  }
}

TEST_CASE("a grammar of invalid inputs has zero soundness") {
  auto g = parse_grammar("S ::= 'zz'");
  auto r = soundness(g, "json", 50, 0);
  CHECK(r.accepted == 0);
  CHECK(r.pct() == doctest::Approx(0.0));
  CHECK(r.rejected.size() == kMaxRejectedExamples);
  CHECK(r.rejected.front() == "zz");
  SubjectOracle oracle("json");
  CHECK(soundness(g, oracle, 50, 0).accepted == 0);
}

TEST_CASE("threaded and sequential soundness agree") {
  auto g = parse_grammar("S ::= '[' [@DIGITS (',' @INTEGER)*] ']' | @ALPHAS");
  SubjectOracle oracle("json");
  auto threaded = soundness(g, "json", 200, 4);
  auto sequential = soundness(g, oracle, 200, 4);
  CHECK(threaded.accepted == sequential.accepted);
  CHECK(threaded.rejected == sequential.rejected);
  CHECK(threaded.accepted > 0);
  CHECK(threaded.accepted < 200);
}

TEST_CASE("string seeds are deterministic and distinct") {
  CHECK(string_seed(7, 3) == string_seed(7, 3));
  std::set<std::uint64_t> seen;
  for (std::size_t i = 0; i < 1000; ++i) seen.insert(string_seed(7, i));
  CHECK(seen.size() == 1000);
  CHECK(string_seed(7, 0) != string_seed(8, 0));
}

TEST_CASE("reports are deterministic key-value text") {
  auto g = parse_grammar("S ::= '[' [@DIGITS] ']' | 'zz'");
  auto golden = load_golden("json");
  auto a = to_text(evaluate(g, "g.txt", "json", &golden, 100, 9));
  auto b = to_text(evaluate(g, "g.txt", "json", &golden, 100, 9));
  CHECK(a == b);
  CHECK(a.starts_with("GRAMMAR_ID=g.txt\nSUBJECT=json\nN_SAMPLES=100\nSEED=9\nSOUNDNESS_ACCEPTED="));
  CHECK(a.find("\nCOMPLETENESS_PCT=") != std::string::npos);
  CHECK(a.find("\nUNSOUND_EXAMPLE='zz'\n") != std::string::npos);
  auto no_golden = to_text(evaluate(g, "g.txt", "json", nullptr, 10, 9));
  CHECK(no_golden.find("COMPLETENESS") == std::string::npos);
}

TEST_CASE("unknown subjects and missing files are errors") {
  CHECK_THROWS_AS(soundness(parse_grammar("S ::= 'a'"), "yaml", 1, 0), UnknownSubject);
  CHECK_THROWS(read_file(data_dir() / "missing.txt"));
}
