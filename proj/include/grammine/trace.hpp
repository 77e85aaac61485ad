#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "grammine/taint.hpp"

namespace grammine {

enum class EventKind {
  CallEnter,
  CallExit,
  ParamBind,
  ReturnValue,
  FieldLoad,
  FieldStore,
  ArrayLoad,
  ArrayStore,
  Touch,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view text);

enum class Verdict { Pass, Fail };

std::string_view to_string(Verdict v);

/// One observation of the running subject.
///
/// `name` is the method for call events, `method:index:param` for ParamBind,
/// the method for ReturnValue, and the field or array identifier for loads and
/// stores. Touch events carry no name.
struct TraceEvent {
  EventKind kind = EventKind::Touch;
  std::int64_t call_id = 0;
  std::optional<std::int64_t> parent_call_id;
  std::string name;
  TaintSet taint;
  std::uint64_t seq = 0;

  bool operator==(const TraceEvent&) const = default;
};

struct ExecutionTrace {
  std::string input;
  std::vector<TraceEvent> events;
  Verdict verdict = Verdict::Fail;
  std::optional<std::string> failure_detail;

  /// Union of the taint of every event.
  TaintSet coverage() const;
};

/// Thrown by subject parsers to reject an input.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Records the events of a single subject run.
///
/// Subjects open a `Call` for every parse method; its destructor records the
/// matching exit, so the call structure stays balanced when a parser throws.
class Tracer {
 public:
  explicit Tracer(std::string input);

  Tracer(const Tracer&) = delete;
  Tracer& operator=(const Tracer&) = delete;

  const TracedString& input() const { return input_; }

  class Call {
   public:
    Call(Tracer& tracer, std::string method);
    ~Call();
    Call(const Call&) = delete;
    Call& operator=(const Call&) = delete;

    void param(int index, std::string_view name, const TaintSet& taint);
    void param(int index, std::string_view name, const TracedString& value) {
      param(index, name, value.taint());
    }
    void returns(const TaintSet& taint);
    void returns(const TracedString& value) { returns(value.taint()); }

   private:
    Tracer& tracer_;
    std::string method_;
    std::int64_t id_;
  };

  void field_load(std::string_view field, const TaintSet& taint);
  void field_store(std::string_view field, const TaintSet& taint);
  void field_store(std::string_view field, const TracedString& value) {
    field_store(field, value.taint());
  }
  void array_load(std::string_view array, const TaintSet& taint);
  void array_store(std::string_view array, const TaintSet& taint);

  /// Records that the current call inspected tainted data.
  void touch(const TaintSet& taint);

  /// Compares a traced byte with a constant; the comparison is a Touch.
  bool is(const TracedChar& c, char expected);
  /// Touches `c` and returns its value for branching.
  char look(const TracedChar& c);

  ExecutionTrace finish(Verdict verdict, std::optional<std::string> detail = std::nullopt) &&;

 private:
  void emit(EventKind kind, std::int64_t call_id, std::optional<std::int64_t> parent,
            std::string name, TaintSet taint);
  std::optional<std::int64_t> current() const;
  std::optional<std::int64_t> parent_of_current() const;

  TracedString input_;
  ExecutionTrace trace_;
  std::vector<std::int64_t> stack_;
  std::int64_t next_call_ = 1;
  std::uint64_t next_seq_ = 0;
};

/// Writes the line-oriented dump: INPUT header, one EVT line per event, VERDICT footer.
void write_trace(std::ostream& out, const ExecutionTrace& trace);
std::string dump_trace(const ExecutionTrace& trace);
/// Parses a dump produced by `write_trace`.
ExecutionTrace parse_trace(std::string_view text);

}  // namespace grammine
