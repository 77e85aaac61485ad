#include "grammine/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#ifndef GRAMMINE_DATA_DIR
#define GRAMMINE_DATA_DIR "data"
#endif

namespace grammine {

std::uint64_t string_seed(std::uint64_t seed, std::size_t i) {
  // splitmix64 of (seed, i)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(i) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

/// Evaluates `check` on strings 0..n-1 over a few threads; results stay in index order.
Rate tally(std::size_t n, const std::function<std::pair<std::string, bool>(std::size_t)>& check) {
  std::vector<std::string> inputs(n);
  std::vector<char> ok(n, 0);
  std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
  workers = std::min(workers, std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        auto [text, accepted] = check(i);
        inputs[i] = std::move(text);
        ok[i] = accepted;
      }
    });
  for (auto& t : pool) t.join();
  Rate r;
  r.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (ok[i])
      ++r.accepted;
    else if (r.rejected.size() < kMaxRejectedExamples)
      r.rejected.push_back(inputs[i]);
  }
  return r;
}

std::string pct_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

Rate soundness(const Grammar& g, std::string_view subject, std::size_t n, std::uint64_t seed,
               const TokenLattice& lattice, int max_depth) {
  std::string id(subject);
  SubjectRegistry::global().get(id);
  return tally(n, [&](std::size_t i) {
    auto s = produce(g, string_seed(seed, i), max_depth, lattice);
    bool accepted = oracle_accepts(id, s) == Verdict::Pass;
    return std::pair{std::move(s), accepted};
  });
}

Rate soundness(const Grammar& g, Oracle& oracle, std::size_t n, std::uint64_t seed,
               const TokenLattice& lattice, int max_depth) {
  Rate r;
  r.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    auto s = produce(g, string_seed(seed, i), max_depth, lattice);
    if (oracle.accepts(s) == Verdict::Pass)
      ++r.accepted;
    else if (r.rejected.size() < kMaxRejectedExamples)
      r.rejected.push_back(std::move(s));
  }
  return r;
}

Rate completeness(const Grammar& g, const Grammar& golden, std::size_t n, std::uint64_t seed,
                  const TokenLattice& lattice, int max_depth) {
  auto cfg = desugar(g, lattice);
  return tally(n, [&](std::size_t i) {
    auto s = produce(golden, string_seed(seed, i), max_depth, lattice);
    bool accepted = accepts(cfg, s);
    return std::pair{std::move(s), accepted};
  });
}

EvalReport evaluate(const Grammar& g, std::string grammar_id, std::string_view subject,
                    const Grammar* golden, std::size_t n, std::uint64_t seed, const TokenLattice& lattice) {
  EvalReport r;
  r.grammar_id = std::move(grammar_id);
  r.subject = std::string(subject);
  r.n_samples = n;
  r.seed = seed;
  r.soundness = soundness(g, subject, n, seed, lattice);
  if (golden) r.completeness = completeness(g, *golden, n, seed, lattice);
  return r;
}

std::string to_text(const EvalReport& report) {
  std::ostringstream out;
  out << "GRAMMAR_ID=" << report.grammar_id << '\n'
      << "SUBJECT=" << report.subject << '\n'
      << "N_SAMPLES=" << report.n_samples << '\n'
      << "SEED=" << report.seed << '\n'
      << "SOUNDNESS_ACCEPTED=" << report.soundness.accepted << '\n'
      << "SOUNDNESS_REJECTED=" << report.soundness.n - report.soundness.accepted << '\n'
      << "SOUNDNESS_PCT=" << pct_text(report.soundness.pct()) << '\n';
  for (const auto& s : report.soundness.rejected) out << "UNSOUND_EXAMPLE=" << escape_terminal(s) << '\n';
  if (report.completeness) {
    const auto& c = *report.completeness;
    out << "COMPLETENESS_ACCEPTED=" << c.accepted << '\n'
        << "COMPLETENESS_REJECTED=" << c.n - c.accepted << '\n'
        << "COMPLETENESS_PCT=" << pct_text(c.pct()) << '\n';
    for (const auto& s : c.rejected) out << "INCOMPLETE_EXAMPLE=" << escape_terminal(s) << '\n';
  }
  return out.str();
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("GRAMMINE_DATA_DIR"); env && *env) return env;
  return GRAMMINE_DATA_DIR;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Grammar load_golden(std::string_view subject) {
  return parse_grammar(read_file(data_dir() / "golden" / (std::string(subject) + ".txt")));
}

}  // namespace grammine
