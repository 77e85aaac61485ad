#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "grammine/taint.hpp"
#include "grammine/trace.hpp"

using namespace grammine;

namespace {

std::set<std::size_t> model_of(const TaintSet& t) {
  std::set<std::size_t> out;
  for (auto tag : t.tags()) out.insert(tag.offset);
  return out;
}

/// Consecutive per the definition: non-empty and max - min + 1 == size.
bool model_consecutive(const std::set<std::size_t>& s) {
  return !s.empty() && *s.rbegin() - *s.begin() + 1 == s.size();
}

}  // namespace

TEST_CASE("taint set agrees with a plain set under random inserts and merges") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 300; ++round) {
    TaintSet a, b;
    std::set<std::size_t> ma, mb;
    int ops = static_cast<int>(rng() % 12);
    for (int i = 0; i < ops; ++i) {
      std::size_t lo = rng() % 40, hi = lo + rng() % 4;
      if (rng() % 2) {
        a.insert_range(lo, hi);
        for (auto k = lo; k <= hi; ++k) ma.insert(k);
      } else {
        b.insert(lo);
        mb.insert(lo);
      }
    }
    CHECK(model_of(a) == ma);
    CHECK(a.is_consecutive() == model_consecutive(ma));
    CHECK(a.count() == ma.size());
    auto u = union_taint(a, b);
    std::set<std::size_t> mu = ma;
    mu.insert(mb.begin(), mb.end());
    CHECK(model_of(u) == mu);
    for (std::size_t k = 0; k < 45; ++k) CHECK(u.contains(k) == (mu.count(k) == 1));
    for (std::size_t i = 1; i < u.runs().size(); ++i) CHECK(u.runs()[i - 1].hi + 1 < u.runs()[i].lo);
  }
}

TEST_CASE("empty taint is not consecutive") {
  CHECK_FALSE(TaintSet{}.is_consecutive());
  CHECK(TaintSet::span(3, 5).is_consecutive());
  auto gap = TaintSet::of(1);
  gap.insert(3);
  CHECK_FALSE(gap.is_consecutive());
}

TEST_CASE("traced strings keep per-byte origins through substr and concatenation") {
  auto in = TracedString::from_input("hello world");
  auto w = in.substr(6, 5);
  CHECK(w.bytes() == "world");
  CHECK(w.taint() == TaintSet::span(6, 10));
  auto mixed = in.substr(0, 1) + TracedString::literal("-") + in.substr(10, 1);
  CHECK(mixed.bytes() == "h-d");
  CHECK(model_of(mixed.taint()) == std::set<std::size_t>{0, 10});
  CHECK(TracedString::literal("abc").taint().empty());
}

TEST_CASE("tracer records balanced calls with caller links") {
  Tracer t("ab");
  {
    Tracer::Call outer(t, "outer");
    outer.param(0, "s", t.input());
    {
      Tracer::Call inner(t, "inner");
      CHECK(t.is(t.input().at(0), 'a'));
      inner.returns(t.input().substr(1, 1));
    }
    t.field_store("f", t.input().substr(0, 1));
  }
  auto trace = std::move(t).finish(Verdict::Pass);
  int depth = 0;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::CallEnter) ++depth;
    if (e.kind == EventKind::CallExit) --depth;
    CHECK(depth >= 0);
  }
  CHECK(depth == 0);
  std::int64_t outer_id = 0, inner_id = 0;
  for (const auto& e : trace.events)
    if (e.kind == EventKind::CallEnter) (e.name == "outer" ? outer_id : inner_id) = e.call_id;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::CallEnter && e.name == "inner") CHECK(e.parent_call_id == outer_id);
    if (e.kind == EventKind::ReturnValue) {
      CHECK(e.call_id == inner_id);
      CHECK(e.parent_call_id == outer_id);
      CHECK(e.taint == TaintSet::of(1));
    }
    if (e.kind == EventKind::Touch) CHECK(e.call_id == inner_id);
    if (e.kind == EventKind::FieldStore) CHECK(e.call_id == outer_id);
  }
  for (std::size_t i = 1; i < trace.events.size(); ++i) CHECK(trace.events[i - 1].seq < trace.events[i].seq);
}

TEST_CASE("reading a traced char value directly records nothing") {
  Tracer t("x");
  {
    Tracer::Call c(t, "m");
    char v = t.input().at(0).value;
    CHECK(v == 'x');
  }
  auto trace = std::move(t).finish(Verdict::Pass);
  for (const auto& e : trace.events) CHECK(e.kind != EventKind::Touch);
}

TEST_CASE("trace dump round-trips") {
  Tracer t("a\nb");
  {
    Tracer::Call c(t, "m");
    c.param(0, "p", t.input());
    t.look(t.input().at(1));
  }
  auto trace = std::move(t).finish(Verdict::Fail, "detail");
  auto back = parse_trace(dump_trace(trace));
  CHECK(back.input == trace.input);
  CHECK(back.events == trace.events);
  CHECK(back.verdict == Verdict::Fail);
}
