#include "grammine/trace.hpp"

#include <array>
#include <charconv>
#include <ostream>
#include <sstream>

namespace grammine {

namespace {

constexpr std::array<std::string_view, 9> kKindNames = {
    "CallEnter", "CallExit",  "ParamBind",  "ReturnValue", "FieldLoad",
    "FieldStore", "ArrayLoad", "ArrayStore", "Touch",
};

std::string to_hex(std::string_view bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0xf]);
  }
  return out;
}

std::string from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("bad hex digit");
  };
  std::string out;
  for (std::size_t i = 0; i < hex.size(); i += 2)
    out.push_back(static_cast<char>(nibble(hex[i]) * 16 + nibble(hex[i + 1])));
  return out;
}

template <typename T>
T parse_number(std::string_view text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument("bad number in trace dump: " + std::string(text));
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::string_view to_string(EventKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<EventKind> event_kind_from_string(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == text) return static_cast<EventKind>(i);
  return std::nullopt;
}

std::string_view to_string(Verdict v) { return v == Verdict::Pass ? "PASS" : "FAIL"; }

TaintSet ExecutionTrace::coverage() const {
  TaintSet all;
  for (const auto& e : events) all.merge(e.taint);
  return all;
}

Tracer::Tracer(std::string input) : input_(TracedString::from_input(input)) {
  trace_.input = std::move(input);
}

Tracer::Call::Call(Tracer& tracer, std::string method)
    : tracer_(tracer), method_(std::move(method)), id_(tracer.next_call_++) {
  tracer_.emit(EventKind::CallEnter, id_, tracer_.current(), method_, {});
  tracer_.stack_.push_back(id_);
}

Tracer::Call::~Call() {
  tracer_.stack_.pop_back();
  tracer_.emit(EventKind::CallExit, id_, tracer_.current(), method_, {});
}

void Tracer::Call::param(int index, std::string_view name, const TaintSet& taint) {
  tracer_.emit(EventKind::ParamBind, id_, tracer_.parent_of_current(),
               method_ + ":" + std::to_string(index) + ":" + std::string(name), taint);
}

void Tracer::Call::returns(const TaintSet& taint) {
  tracer_.emit(EventKind::ReturnValue, id_, tracer_.parent_of_current(), method_, taint);
}

void Tracer::field_load(std::string_view field, const TaintSet& taint) {
  emit(EventKind::FieldLoad, current().value_or(0), parent_of_current(), std::string(field), taint);
}

void Tracer::field_store(std::string_view field, const TaintSet& taint) {
  emit(EventKind::FieldStore, current().value_or(0), parent_of_current(), std::string(field), taint);
}

void Tracer::array_load(std::string_view array, const TaintSet& taint) {
  emit(EventKind::ArrayLoad, current().value_or(0), parent_of_current(), std::string(array), taint);
}

void Tracer::array_store(std::string_view array, const TaintSet& taint) {
  emit(EventKind::ArrayStore, current().value_or(0), parent_of_current(), std::string(array), taint);
}

void Tracer::touch(const TaintSet& taint) {
  if (taint.empty()) return;
  emit(EventKind::Touch, current().value_or(0), parent_of_current(), {}, taint);
}

bool Tracer::is(const TracedChar& c, char expected) {
  touch(c.taint());
  return c.value == expected;
}

char Tracer::look(const TracedChar& c) {
  touch(c.taint());
  return c.value;
}

ExecutionTrace Tracer::finish(Verdict verdict, std::optional<std::string> detail) && {
  trace_.verdict = verdict;
  trace_.failure_detail = std::move(detail);
  return std::move(trace_);
}

void Tracer::emit(EventKind kind, std::int64_t call_id, std::optional<std::int64_t> parent,
                  std::string name, TaintSet taint) {
  trace_.events.push_back(
      TraceEvent{kind, call_id, parent, std::move(name), std::move(taint), next_seq_++});
}

std::optional<std::int64_t> Tracer::current() const {
  if (stack_.empty()) return std::nullopt;
  return stack_.back();
}

std::optional<std::int64_t> Tracer::parent_of_current() const {
  if (stack_.size() < 2) return std::nullopt;
  return stack_[stack_.size() - 2];
}

void write_trace(std::ostream& out, const ExecutionTrace& trace) {
  out << "INPUT " << to_hex(trace.input) << '\n';
  for (const auto& e : trace.events) {
    out << "EVT " << e.seq << ' ' << to_string(e.kind) << ' ' << e.call_id << ' ';
    if (e.parent_call_id) out << *e.parent_call_id;
    else out << '-';
    out << ' ' << (e.name.empty() ? std::string("-") : e.name) << ' ';
    if (e.taint.empty()) {
      out << '-';
    } else {
      bool first = true;
      for (const auto& r : e.taint.runs()) {
        if (!first) out << ',';
        first = false;
        out << r.lo << '-' << r.hi;
      }
    }
    out << '\n';
  }
  out << "VERDICT " << to_string(trace.verdict) << '\n';
}

std::string dump_trace(const ExecutionTrace& trace) {
  std::ostringstream out;
  write_trace(out, trace);
  return out.str();
}

ExecutionTrace parse_trace(std::string_view text) {
  ExecutionTrace trace;
  bool have_verdict = false;
  for (auto line : split(text, '\n')) {
    if (line.empty()) continue;
    auto fields = split(line, ' ');
    if (fields[0] == "INPUT" && fields.size() == 2) {
      trace.input = from_hex(fields[1]);
    } else if (fields[0] == "VERDICT" && fields.size() == 2) {
      if (fields[1] == "PASS") trace.verdict = Verdict::Pass;
      else if (fields[1] == "FAIL") trace.verdict = Verdict::Fail;
      else throw std::invalid_argument("bad verdict");
      have_verdict = true;
    } else if (fields[0] == "EVT" && fields.size() == 7) {
      TraceEvent e;
      e.seq = parse_number<std::uint64_t>(fields[1]);
      auto kind = event_kind_from_string(fields[2]);
      if (!kind) throw std::invalid_argument("bad event kind: " + std::string(fields[2]));
      e.kind = *kind;
      e.call_id = parse_number<std::int64_t>(fields[3]);
      if (fields[4] != "-") e.parent_call_id = parse_number<std::int64_t>(fields[4]);
      if (fields[5] != "-") e.name = std::string(fields[5]);
      if (fields[6] != "-") {
        for (auto run : split(fields[6], ',')) {
          auto dash = run.find('-');
          if (dash == std::string_view::npos) throw std::invalid_argument("bad range");
          e.taint.insert_range(parse_number<std::size_t>(run.substr(0, dash)),
                               parse_number<std::size_t>(run.substr(dash + 1)));
        }
      }
      trace.events.push_back(std::move(e));
    } else {
      throw std::invalid_argument("bad trace line: " + std::string(line));
    }
  }
  if (!have_verdict) throw std::invalid_argument("trace dump lacks VERDICT line");
  return trace;
}

}  // namespace grammine
