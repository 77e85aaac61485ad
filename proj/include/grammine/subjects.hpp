#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "grammine/trace.hpp"

namespace grammine {

/// Parses the whole input of a tracer, throwing ParseError on rejection.
using SubjectEntry = std::function<void(Tracer&)>;

struct SubjectSpec {
  std::string id;
  SubjectEntry entry;
  std::vector<std::string> samples;
};

class UnknownSubject : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SubjectRegistry {
 public:
  /// Registry pre-populated with url, csv, json, ini and properties.
  static SubjectRegistry& global();

  void add(SubjectSpec spec);
  bool has(std::string_view id) const;
  const SubjectSpec& get(std::string_view id) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, SubjectSpec, std::less<>> specs_;
};

ExecutionTrace trace_run(std::string_view subject, std::string input);
Verdict oracle_accepts(std::string_view subject, std::string_view input);
ExecutionTrace subject_structure(std::string_view subject, std::string input);

/// Membership oracle. Subjects also provide traces; external commands do not.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual Verdict accepts(std::string_view input) = 0;
  virtual std::optional<ExecutionTrace> trace(std::string_view input) {
    (void)input;
    return std::nullopt;
  }
};

class SubjectOracle : public Oracle {
 public:
  explicit SubjectOracle(std::string subject);
  Verdict accepts(std::string_view input) override;
  std::optional<ExecutionTrace> trace(std::string_view input) override;
  const std::string& subject() const { return subject_; }

 private:
  std::string subject_;
};

/// Runs `command <path>` with the candidate written to a temporary file;
/// exit status 0 means PASS.
class CommandOracle : public Oracle {
 public:
  explicit CommandOracle(std::string command);
  Verdict accepts(std::string_view input) override;

 private:
  std::string command_;
};

namespace subjects {

void url(Tracer& t);
void csv(Tracer& t);
void json(Tracer& t);
void ini(Tracer& t);
void properties(Tracer& t);

extern const std::string_view kUrlSample;
extern const std::string_view kCsvSample;
extern const std::string_view kJsonSample;
extern const std::string_view kIniSample;
extern const std::string_view kPropertiesSample;

}  // namespace subjects

}  // namespace grammine
