#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grammine/grammar.hpp"
#include "grammine/interval_tree.hpp"
#include "grammine/lattice.hpp"
#include "grammine/subjects.hpp"

namespace grammine {

struct QueryRecord {
  std::size_t n = 0;
  std::string input;
  Verdict verdict = Verdict::Fail;
  /// Colon-separated tag without spaces, e.g. `token:PORT:DIGITS`.
  std::string purpose;
  /// Rewrite that this query helped justify, filled in when committed.
  std::optional<std::string> edit;
};

class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default taken from GRAMMINE_QUERY_BUDGET, else 10000.
std::size_t default_query_budget();

struct QueryBudget {
  std::size_t max_queries = default_query_budget();
  std::size_t used = 0;

  bool exhausted() const { return used >= max_queries; }
};

/// Baseline interval paired with the interval holding the same fragment in a candidate.
using RegionPair = std::pair<Interval, Interval>;

/// Compares, per region pair, the multiset of program elements (each call of
/// a method, parameter, return value, field or array access) whose interval
/// intersects the region. For the `replaced` pair only elements lying
/// entirely inside the region are compared.
bool dataflow_equivalent(const ExecutionTrace& baseline, const ExecutionTrace& candidate,
                         const std::vector<RegionPair>& preserved,
                         const std::optional<RegionPair>& replaced = std::nullopt);

struct GeneralizeConfig {
  /// Occurrences of an alternative tried per optional or repetition candidate.
  std::size_t max_occurrences = 3;
  /// Alternatives longer than this only get single-element optional probes.
  std::size_t max_span_elements = 10;
  /// Up to this many passing spans, the optional nesting is chosen exhaustively.
  std::size_t exhaustive_spans = 16;
  int max_unit = 4;
  int max_separator = 2;
  int max_copies = 5;
  /// Probes per token class and occurrence.
  std::size_t probes_per_class = SIZE_MAX;
};

/// Oracle access, query log and the samples every candidate is derived from.
class Learner {
 public:
  Learner(Oracle& oracle, std::vector<std::string> samples,
          const TokenLattice& lattice = TokenLattice::standard(), QueryBudget budget = {},
          GeneralizeConfig config = {});

  /// PASS iff the oracle accepts and, when traces are available, the
  /// preserved regions are data-flow equivalent to the baseline sample.
  Verdict membership_query(const std::string& candidate, std::size_t sample,
                           const std::vector<RegionPair>& preserved, const std::string& purpose,
                           const std::optional<RegionPair>& replaced = std::nullopt);

  /// Replaces `current` with `next` if every sample is still accepted.
  bool commit(Grammar& current, Grammar next, const std::string& edit);

  const std::vector<std::string>& samples() const { return samples_; }
  const TokenLattice& lattice() const { return lattice_; }
  const GeneralizeConfig& config() const { return config_; }
  const QueryBudget& budget() const { return budget_; }
  const std::vector<QueryRecord>& log() const { return log_; }

  std::size_t commits() const { return commits_; }
  std::size_t rejected_commits() const { return rejected_; }
  /// Called with every committed grammar.
  std::function<void(const Grammar&, const std::string&)> on_commit;

 private:
  struct Outcome {
    Verdict verdict;
    std::optional<ExecutionTrace> trace;
  };
  const Outcome& run(const std::string& input);

  Oracle& oracle_;
  std::vector<std::string> samples_;
  std::vector<std::optional<ExecutionTrace>> baselines_;
  const TokenLattice& lattice_;
  QueryBudget budget_;
  GeneralizeConfig config_;
  std::vector<QueryRecord> log_;
  std::map<std::string, Outcome> cache_;
  std::size_t last_committed_query_ = 0;
  std::size_t commits_ = 0;
  std::size_t rejected_ = 0;
};

/// Probes omitting each single element of every alternative.
void find_single_optionals(Grammar& g, Learner& learner);
/// Probes omitting every contiguous span, longest first, and nests the
/// passing spans as optionals.
void find_optionals(Grammar& g, Learner& learner);
void generalize_repetitions(Grammar& g, Learner& learner);
void generalize_tokens(Grammar& g, Learner& learner);

/// All passes in order: single optionals, repetitions, optionals, tokens.
/// Stops early, keeping what was learned, when the budget runs out.
Grammar generalize(Grammar g, Learner& learner);

void write_query_log(std::ostream& out, const std::vector<QueryRecord>& log);
std::vector<QueryRecord> parse_query_log(std::string_view text);

}  // namespace grammine
