// Lenient properties loader after java.util.Properties: comment and blank
// lines are skipped while reading the next logical line, and a line without
// '=' is a key with an empty value.

#include "grammine/subjects.hpp"

namespace grammine::subjects {

namespace {

class LineReader {
 public:
  explicit LineReader(Tracer& t) : t_(t), in_(t.input()) {}

  std::optional<TracedString> read_line() {
    Tracer::Call call(t_, "readLine");
    while (pos_ < in_.size()) {
      char first = t_.look(in_.at(pos_));
      if (first == '#' || first == '!') {
        skip_to_next_line();
      } else if (first == '\n') {
        ++pos_;
      } else {
        break;
      }
    }
    if (pos_ >= in_.size()) return std::nullopt;
    auto begin = pos_;
    while (pos_ < in_.size() && !t_.is(in_.at(pos_), '\n')) ++pos_;
    auto line = in_.substr(begin, pos_ - begin);
    if (pos_ < in_.size()) ++pos_;
    call.returns(line);
    return line;
  }

 private:
  void skip_to_next_line() {
    while (pos_ < in_.size() && !t_.is(in_.at(pos_), '\n')) ++pos_;
    if (pos_ < in_.size()) ++pos_;
  }

  Tracer& t_;
  const TracedString& in_;
  std::size_t pos_ = 0;
};

void put(Tracer& t, const TracedString& key, const TracedString& value) {
  Tracer::Call call(t, "put");
  call.param(0, "arg", key);
  call.param(1, "arg", value);
}

void load(Tracer& t) {
  Tracer::Call call(t, "load");
  LineReader reader(t);
  while (auto line = reader.read_line()) {
    std::size_t eq = 0;
    while (eq < line->size() && !t.is(line->at(eq), '=')) ++eq;
    auto key = line->substr(0, eq);
    auto value = eq < line->size() ? line->substr(eq + 1) : TracedString();
    put(t, key, value);
  }
}

}  // namespace

void properties(Tracer& t) {
  Tracer::Call call(t, "main");
  load(t);
}

}  // namespace grammine::subjects
