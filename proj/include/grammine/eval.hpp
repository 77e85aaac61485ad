#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grammine/grammar.hpp"
#include "grammine/subjects.hpp"

namespace grammine {

inline constexpr std::size_t kDefaultEvalCount = 1000;
inline constexpr std::size_t kMaxRejectedExamples = 10;

/// Outcome of checking `n` produced strings against an acceptor.
struct Rate {
  std::size_t n = 0;
  std::size_t accepted = 0;
  /// The first few rejected strings.
  std::vector<std::string> rejected;

  double pct() const { return n == 0 ? 0.0 : 100.0 * static_cast<double>(accepted) / static_cast<double>(n); }
};

/// Seed of the i-th produced string for a run seeded with `seed`.
std::uint64_t string_seed(std::uint64_t seed, std::size_t i);

/// Strings produced from `g`, checked against the subject.
Rate soundness(const Grammar& g, std::string_view subject, std::size_t n, std::uint64_t seed,
               const TokenLattice& lattice = TokenLattice::standard(), int max_depth = kDefaultMaxDepth);
/// Same, against an arbitrary oracle; runs sequentially.
Rate soundness(const Grammar& g, Oracle& oracle, std::size_t n, std::uint64_t seed,
               const TokenLattice& lattice = TokenLattice::standard(), int max_depth = kDefaultMaxDepth);
/// Strings produced from `golden`, checked against `g`.
Rate completeness(const Grammar& g, const Grammar& golden, std::size_t n, std::uint64_t seed,
                  const TokenLattice& lattice = TokenLattice::standard(), int max_depth = kDefaultMaxDepth);

struct EvalReport {
  std::string grammar_id;
  std::string subject;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  Rate soundness;
  std::optional<Rate> completeness;
};

EvalReport evaluate(const Grammar& g, std::string grammar_id, std::string_view subject,
                    const Grammar* golden, std::size_t n, std::uint64_t seed,
                    const TokenLattice& lattice = TokenLattice::standard());

/// Line-oriented KEY=VALUE text; rejected strings are escaped like terminals.
std::string to_text(const EvalReport& report);

/// Bundled data directory: GRAMMINE_DATA_DIR if set, else the source tree's data/.
std::filesystem::path data_dir();
std::string read_file(const std::filesystem::path& path);
/// Golden grammar for a subject, from data/golden/<subject>.txt.
Grammar load_golden(std::string_view subject);

}  // namespace grammine
