// Line-oriented INI reader: `[section]` headers and `key=value` entries.

#include "grammine/subjects.hpp"

namespace grammine::subjects {

namespace {

void parse_line(Tracer& t, const TracedString& line) {
  Tracer::Call call(t, "parseLine");
  call.param(0, "line", line);
  if (line.empty()) throw ParseError("empty line");
  if (t.is(line.at(0), '[')) {
    std::size_t i = 1;
    while (i < line.size() && !t.is(line.at(i), ']')) ++i;
    if (i >= line.size() || i == 1) throw ParseError("malformed section header");
    if (i + 1 != line.size()) throw ParseError("text after section header");
    t.field_store("section", line.substr(1, i - 1));
    return;
  }
  std::size_t eq = 0;
  while (eq < line.size() && !t.is(line.at(eq), '=')) ++eq;
  if (eq == line.size()) throw ParseError("expected '='");
  if (eq == 0) throw ParseError("empty key");
  t.field_store("key", line.substr(0, eq));
  t.field_store("value", line.substr(eq + 1));
}

/// Reads one line including its terminator; returns false at end of input.
bool read_line(Tracer& t, std::size_t& pos) {
  const auto& in = t.input();
  if (pos >= in.size()) return false;
  Tracer::Call call(t, "readLine");
  auto begin = pos;
  while (pos < in.size() && !t.is(in.at(pos), '\n')) ++pos;
  auto line = in.substr(begin, pos - begin);
  if (pos < in.size()) ++pos;
  parse_line(t, line);
  return true;
}

}  // namespace

void ini(Tracer& t) {
  Tracer::Call call(t, "load");
  if (t.input().empty()) throw ParseError("empty input");
  std::size_t pos = 0;
  while (read_line(t, pos)) {
  }
}

}  // namespace grammine::subjects
