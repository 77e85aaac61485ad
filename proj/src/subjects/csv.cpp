// Semicolon-separated values with optional double-quoted fields. Like a
// streaming lexer, every token after the first starts with the delimiter that
// precedes it.

#include "grammine/subjects.hpp"

namespace grammine::subjects {

namespace {

class CsvLexer {
 public:
  explicit CsvLexer(Tracer& t) : t_(t), in_(t.input()) {}

  bool at_end() const { return pos_ >= in_.size(); }

  /// Peeks at the next byte; the comparison is recorded.
  bool next_is(char c) { return !at_end() && t_.is(in_.at(pos_), c); }

  void parse_header() {
    Tracer::Call call(t_, "parseHeader");
    if (next_is('"')) {
      encapsulated_token();
    } else {
      auto content = read_plain();
      t_.field_store("header", content);
    }
    expect_delimiter_or_end();
  }

  void next_token() {
    Tracer::Call call(t_, "nextToken");
    if (!(next_is(';') || next_is('\n'))) throw ParseError("expected delimiter");
    ++pos_;
    if (next_is('"')) {
      encapsulated_token();
    } else {
      auto content = read_plain();
      t_.field_store("key", content);
    }
    expect_delimiter_or_end();
  }

 private:
  TracedString read_plain() {
    auto begin = pos_;
    while (!at_end()) {
      char c = t_.look(in_.at(pos_));
      if (c == ';' || c == '\n') break;
      ++pos_;
    }
    return in_.substr(begin, pos_ - begin);
  }

  void encapsulated_token() {
    Tracer::Call call(t_, "encapsulatedToken");
    t_.is(in_.at(pos_++), '"');
    auto begin = pos_;
    while (true) {
      if (at_end()) throw ParseError("unterminated quoted field");
      if (t_.is(in_.at(pos_), '"')) break;
      ++pos_;
    }
    t_.field_store("key", in_.substr(begin, pos_ - begin));
    ++pos_;
  }

  void expect_delimiter_or_end() {
    if (at_end()) return;
    char c = t_.look(in_.at(pos_));
    if (c != ';' && c != '\n') throw ParseError("unexpected character after quoted field");
  }

  Tracer& t_;
  const TracedString& in_;
  std::size_t pos_ = 0;
};

void csv_parser(Tracer& t, CsvLexer& lexer) {
  Tracer::Call call(t, "CSVParser");
  lexer.parse_header();
  while (lexer.next_is(';')) lexer.next_token();
}

void next_record(Tracer& t, CsvLexer& lexer) {
  Tracer::Call call(t, "nextRecord");
  lexer.next_token();
  while (lexer.next_is(';')) lexer.next_token();
}

}  // namespace

void csv(Tracer& t) {
  Tracer::Call call(t, "main");
  if (t.input().empty()) throw ParseError("empty input");
  CsvLexer lexer(t);
  csv_parser(t, lexer);
  while (lexer.next_is('\n')) next_record(t, lexer);
  if (!lexer.at_end()) throw ParseError("trailing input");
}

}  // namespace grammine::subjects
