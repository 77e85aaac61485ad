// Recursive-descent JSON reader in the style of minimal-json.

#include "grammine/subjects.hpp"

namespace grammine::subjects {

namespace {

constexpr int kMaxNesting = 256;

class JsonReader {
 public:
  explicit JsonReader(Tracer& t) : t_(t), in_(t.input()) {}

  void parse() {
    Tracer::Call call(t_, "parse");
    skip_white_space();
    read_value();
    skip_white_space();
    if (!at_end()) throw ParseError("unexpected character after value");
  }

 private:
  bool at_end() const { return pos_ >= in_.size(); }
  // Untraced peek, used only to decide whether a traced read applies.
  int current() const { return at_end() ? -1 : static_cast<unsigned char>(in_.at(pos_).value); }

  bool is_white_space() const {
    int c = current();
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  }

  void skip_white_space() {
    if (!is_white_space()) return;
    Tracer::Call call(t_, "skipWhiteSpace");
    while (is_white_space()) t_.look(in_.at(pos_++));
  }

  bool read_char(char expected) {
    if (current() != static_cast<unsigned char>(expected)) return false;
    Tracer::Call call(t_, "readChar");
    t_.is(in_.at(pos_++), expected);
    return true;
  }

  void read_required_char(char expected) {
    if (!read_char(expected)) throw ParseError(std::string("expected '") + expected + "'");
  }

  void read_value() {
    Tracer::Call call(t_, "readValue");
    if (at_end()) throw ParseError("unexpected end of input");
    char c = t_.look(in_.at(pos_));
    switch (c) {
      case 'n': read_literal("readNull", "null"); break;
      case 't': read_literal("readTrue", "true"); break;
      case 'f': read_literal("readFalse", "false"); break;
      case '"': read_string(); break;
      case '[': read_array(); break;
      case '{': read_object(); break;
      default:
        if (c == '-' || (c >= '0' && c <= '9')) {
          read_number();
        } else {
          throw ParseError("expected value");
        }
    }
  }

  void read_literal(const char* method, std::string_view word) {
    Tracer::Call call(t_, method);
    for (char expected : word) {
      if (at_end() || !t_.is(in_.at(pos_), expected)) throw ParseError("malformed literal");
      ++pos_;
    }
  }

  void read_array() {
    Tracer::Call call(t_, "readArray");
    if (++depth_ > kMaxNesting) throw ParseError("nesting too deep");
    read_required_char('[');
    skip_white_space();
    if (!read_char(']')) {
      do {
        skip_white_space();
        read_value();
        skip_white_space();
      } while (read_char(','));
      read_required_char(']');
    }
    --depth_;
  }

  void read_object() {
    Tracer::Call call(t_, "readObject");
    if (++depth_ > kMaxNesting) throw ParseError("nesting too deep");
    read_required_char('{');
    skip_white_space();
    if (!read_char('}')) {
      do {
        skip_white_space();
        if (current() != '"') throw ParseError("expected name");
        read_string_internal();
        skip_white_space();
        read_required_char(':');
        skip_white_space();
        read_value();
        skip_white_space();
      } while (read_char(','));
      read_required_char('}');
    }
    --depth_;
  }

  void read_string() {
    Tracer::Call call(t_, "readString");
    read_string_internal();
  }

  void read_string_internal() {
    Tracer::Call call(t_, "readStringInternal");
    t_.is(in_.at(pos_++), '"');
    auto begin = pos_;
    while (true) {
      if (at_end()) throw ParseError("unterminated string");
      char c = t_.look(in_.at(pos_));
      if (c == '"') break;
      if (c == '\\') {
        ++pos_;
        read_escape();
        continue;
      }
      if (static_cast<unsigned char>(c) < 0x20 && c != '\t') throw ParseError("control character in string");
      ++pos_;
    }
    t_.field_store("hash", in_.substr(begin, pos_ - begin));
    ++pos_;
  }

  void read_escape() {
    if (at_end()) throw ParseError("unterminated escape");
    char c = t_.look(in_.at(pos_++));
    switch (c) {
      case '"': case '/': case '\\': case 'b': case 'f': case 'n': case 'r': case 't': return;
      case 'u':
        for (int i = 0; i < 4; ++i) {
          if (at_end()) throw ParseError("unterminated escape");
          char h = t_.look(in_.at(pos_++));
          bool hex = (h >= '0' && h <= '9') || (h >= 'a' && h <= 'f') || (h >= 'A' && h <= 'F');
          if (!hex) throw ParseError("invalid unicode escape");
        }
        return;
      default: throw ParseError("invalid escape sequence");
    }
  }

  void read_number() {
    Tracer::Call call(t_, "readNumber");
    read_integer();
    read_fraction();
    read_exponent();
  }

  void read_integer() {
    Tracer::Call call(t_, "readInteger");
    auto begin = pos_;
    if (current() == '-') t_.is(in_.at(pos_++), '-');
    if (at_end()) throw ParseError("expected digit");
    char first = t_.look(in_.at(pos_));
    if (first < '0' || first > '9') throw ParseError("expected digit");
    ++pos_;
    if (first != '0') skip_digits();
    call.returns(in_.substr(begin, pos_ - begin));
  }

  void read_fraction() {
    if (current() != '.') return;
    Tracer::Call call(t_, "readFraction");
    t_.is(in_.at(pos_++), '.');
    read_digits();
  }

  void read_exponent() {
    if (current() != 'e' && current() != 'E') return;
    Tracer::Call call(t_, "readExponent");
    t_.look(in_.at(pos_++));
    if (current() == '+' || current() == '-') t_.look(in_.at(pos_++));
    read_digits();
  }

  void read_digits() {
    Tracer::Call call(t_, "readDigits");
    auto begin = pos_;
    skip_digits();
    if (pos_ == begin) throw ParseError("expected digit");
    call.returns(in_.substr(begin, pos_ - begin));
  }

  void skip_digits() {
    while (current() >= '0' && current() <= '9') t_.look(in_.at(pos_++));
  }

  Tracer& t_;
  const TracedString& in_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

void json(Tracer& t) {
  Tracer::Call call(t, "main");
  JsonReader(t).parse();
}

}  // namespace grammine::subjects
