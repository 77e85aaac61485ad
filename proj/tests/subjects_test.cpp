#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "grammine/eval.hpp"
#include "grammine/subjects.hpp"

using namespace grammine;

namespace {

struct Case {
  const char* subject;
  std::string input;
  Verdict expected;
};

// Verdicts follow from the format definitions, not from running the subjects.
const std::vector<Case> kCases = {
    {"url", "http://www.google.com", Verdict::Pass},
    {"url", "http://a:80", Verdict::Pass},
    {"url", "http://u:p@h/x?q#r", Verdict::Pass},
    {"url", "http://h?#", Verdict::Pass},
    {"url", "www.google.com", Verdict::Fail},
    {"url", "http://", Verdict::Fail},
    {"url", "http://a:8x", Verdict::Fail},
    {"url", "http://a/b c", Verdict::Fail},
    {"url", "ftp://a", Verdict::Fail},
    {"json", "{\"a\":[1,2.5e-3,true,null,\"x\"]}", Verdict::Pass},
    {"json", " [ ] ", Verdict::Pass},
    {"json", "-12", Verdict::Pass},
    {"json", "{\"a\":}", Verdict::Fail},
    {"json", "[1,]", Verdict::Fail},
    {"json", "\"unterminated", Verdict::Fail},
    {"json", "", Verdict::Fail},
    {"csv", "a;\"b\"\nc;d", Verdict::Pass},
    {"csv", "a;;\n;", Verdict::Pass},
    {"csv", "a;\"b\"x", Verdict::Fail},
    {"csv", "", Verdict::Fail},
    {"ini", "[a]\nk = v", Verdict::Pass},
    {"ini", "k=", Verdict::Pass},
    {"ini", "[a]\nkv", Verdict::Fail},
    {"ini", "=v", Verdict::Fail},
    {"ini", "[a\nk=v", Verdict::Fail},
    {"properties", "k=v\n# c\nx=y", Verdict::Pass},
    {"properties", "", Verdict::Pass},
    {"properties", "=v", Verdict::Pass},
};

}  // namespace

TEST_CASE("subjects decide membership like their formats") {
  for (const auto& c : kCases) {
    CAPTURE(c.subject);
    CAPTURE(c.input);
    CHECK(oracle_accepts(c.subject, c.input) == c.expected);
  }
}

TEST_CASE("bundled samples are accepted and match the data directory") {
  auto& reg = SubjectRegistry::global();
  CHECK(reg.names() == std::vector<std::string>{"csv", "ini", "json", "properties", "url"});
  for (const auto& name : reg.names()) {
    CAPTURE(name);
    const auto& spec = reg.get(name);
    REQUIRE_FALSE(spec.samples.empty());
    CHECK(oracle_accepts(name, spec.samples[0]) == Verdict::Pass);
    CHECK(read_file(data_dir() / "samples" / (name + ".txt")) == spec.samples[0]);
  }
}

TEST_CASE("unknown subjects are reported") {
  CHECK_THROWS_AS(SubjectRegistry::global().get("yaml"), UnknownSubject);
}

TEST_CASE("url trace taints the components at their byte offsets") {
  std::string sample(subjects::kUrlSample);
  REQUIRE(sample.size() == 71);
  CHECK(sample.find("/command") == 34);
  CHECK(sample.find('?') == 42);
  CHECK(sample.find('#') == 62);
  auto t = trace_run("url", sample);
  REQUIRE(t.verdict == Verdict::Pass);
  auto field = [&](const std::string& name) -> TaintSet {
    for (const auto& e : t.events)
      if (e.kind == EventKind::FieldStore && e.name == name) return e.taint;
    return {};
  };
  CHECK(field("ref") == TaintSet::span(63, 70));
  CHECK(field("query") == TaintSet::span(43, 61));
  CHECK(field("path") == TaintSet::span(34, 41));
}

TEST_CASE("a rejected run still yields a balanced trace") {
  auto t = trace_run("json", "{\"a\": [1, }");
  CHECK(t.verdict == Verdict::Fail);
  CHECK(t.failure_detail.has_value());
  long depth = 0;
  for (const auto& e : t.events) {
    if (e.kind == EventKind::CallEnter) ++depth;
    if (e.kind == EventKind::CallExit) --depth;
  }
  CHECK(depth == 0);
}

TEST_CASE("subject oracle exposes traces, command oracle uses exit status") {
  SubjectOracle o("csv");
  CHECK(o.accepts("a;b") == Verdict::Pass);
  REQUIRE(o.trace("a;b").has_value());
  CHECK(o.trace("a;b")->verdict == Verdict::Pass);
  CommandOracle yes("true");
  CommandOracle no("false");
  CHECK(yes.accepts("x") == Verdict::Pass);
  CHECK(no.accepts("x") == Verdict::Fail);
  CHECK_FALSE(yes.trace("x").has_value());
}
