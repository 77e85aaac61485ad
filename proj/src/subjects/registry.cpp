#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>
#include <unistd.h>

#include "grammine/subjects.hpp"

namespace grammine {

SubjectRegistry& SubjectRegistry::global() {
  static SubjectRegistry registry = [] {
    SubjectRegistry r;
    r.add({"url", subjects::url, {std::string(subjects::kUrlSample)}});
    r.add({"csv", subjects::csv, {std::string(subjects::kCsvSample)}});
    r.add({"json", subjects::json, {std::string(subjects::kJsonSample)}});
    r.add({"ini", subjects::ini, {std::string(subjects::kIniSample)}});
    r.add({"properties", subjects::properties, {std::string(subjects::kPropertiesSample)}});
    return r;
  }();
  return registry;
}

void SubjectRegistry::add(SubjectSpec spec) {
  auto id = spec.id;
  specs_.insert_or_assign(std::move(id), std::move(spec));
}

bool SubjectRegistry::has(std::string_view id) const { return specs_.find(id) != specs_.end(); }

const SubjectSpec& SubjectRegistry::get(std::string_view id) const {
  auto it = specs_.find(id);
  if (it == specs_.end()) throw UnknownSubject("unknown subject: " + std::string(id));
  return it->second;
}

std::vector<std::string> SubjectRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [id, spec] : specs_) out.push_back(id);
  return out;
}

ExecutionTrace trace_run(std::string_view subject, std::string input) {
  const auto& spec = SubjectRegistry::global().get(subject);
  Tracer tracer(std::move(input));
  try {
    spec.entry(tracer);
  } catch (const ParseError& e) {
    return std::move(tracer).finish(Verdict::Fail, e.what());
  } catch (const std::exception& e) {
    return std::move(tracer).finish(Verdict::Fail, std::string("subject crashed: ") + e.what());
  }
  return std::move(tracer).finish(Verdict::Pass);
}

Verdict oracle_accepts(std::string_view subject, std::string_view input) {
  return trace_run(subject, std::string(input)).verdict;
}

ExecutionTrace subject_structure(std::string_view subject, std::string input) {
  return trace_run(subject, std::move(input));
}

SubjectOracle::SubjectOracle(std::string subject) : subject_(std::move(subject)) {
  SubjectRegistry::global().get(subject_);
}

Verdict SubjectOracle::accepts(std::string_view input) { return oracle_accepts(subject_, input); }

std::optional<ExecutionTrace> SubjectOracle::trace(std::string_view input) {
  return trace_run(subject_, std::string(input));
}

CommandOracle::CommandOracle(std::string command) : command_(std::move(command)) {}

Verdict CommandOracle::accepts(std::string_view input) {
  auto dir = std::filesystem::temp_directory_path();
  std::string pattern = (dir / "grammine-XXXXXX").string();
  int fd = ::mkstemp(pattern.data());
  if (fd < 0) throw std::runtime_error("cannot create temporary file");
  ::close(fd);
  {
    std::ofstream out(pattern, std::ios::binary);
    out.write(input.data(), static_cast<std::streamsize>(input.size()));
  }
  std::string cmd = command_ + " '" + pattern + "' >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  std::filesystem::remove(pattern);
  return (status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0) ? Verdict::Pass
                                                                          : Verdict::Fail;
}

}  // namespace grammine
