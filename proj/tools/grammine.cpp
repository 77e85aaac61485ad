#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "grammine/derivation.hpp"
#include "grammine/eval.hpp"
#include "grammine/generalize.hpp"
#include "grammine/grammar.hpp"
#include "grammine/interval_tree.hpp"
#include "grammine/subjects.hpp"

namespace fs = std::filesystem;
using namespace grammine;

namespace {

constexpr int kUsageError = 1;
constexpr int kPipelineError = 2;

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PipelineError("cannot write " + path);
  out << text;
}

std::vector<std::string> read_inputs(const std::vector<std::string>& files, const std::string& subject) {
  std::vector<std::string> out;
  for (const auto& f : files) out.push_back(read_file(f));
  if (out.empty()) out = SubjectRegistry::global().get(subject).samples;
  return out;
}

std::unique_ptr<TokenLattice> load_lattice(const std::string& path) {
  if (path.empty()) return std::make_unique<TokenLattice>(TokenLattice::standard());
  auto lattice = std::make_unique<TokenLattice>(TokenLattice::parse(read_file(path)));
  if (auto problems = lattice->check(); !problems.empty())
    throw PipelineError("lattice check failed: " + problems.front());
  return lattice;
}

void check_subject(const std::string& subject) {
  if (!SubjectRegistry::global().has(subject)) {
    std::string known;
    for (const auto& n : SubjectRegistry::global().names()) known += " " + n;
    throw CLI::ValidationError("--subject", "unknown subject " + subject + " (known:" + known + ")");
  }
}

struct MineOptions {
  std::string subject;
  std::vector<std::string> inputs;
  std::string output;
  bool tree = false;
};

int run_mine(const MineOptions& o) {
  std::vector<ExecutionTrace> traces;
  for (auto& input : read_inputs(o.inputs, o.subject)) {
    auto t = trace_run(o.subject, input);
    if (t.verdict != Verdict::Pass)
      throw PipelineError("subject rejects input: " + t.failure_detail.value_or("no detail"));
    if (o.tree) std::cerr << dump(interval_tree(t));
    traces.push_back(std::move(t));
  }
  auto d = derive(traces);
  write_output(o.output, serialize(d.grammar));
  return 0;
}

struct GeneralizeOptions {
  std::string subject;
  std::string command;
  std::string grammar;
  std::vector<std::string> samples;
  std::string lattice;
  std::size_t budget = 0;
  std::string output;
  std::string log;
};

int run_generalize(const GeneralizeOptions& o) {
  auto lattice = load_lattice(o.lattice);
  auto g = parse_grammar(read_file(o.grammar));
  std::unique_ptr<Oracle> oracle;
  if (!o.command.empty())
    oracle = std::make_unique<CommandOracle>(o.command);
  else
    oracle = std::make_unique<SubjectOracle>(o.subject);
  std::vector<std::string> samples;
  for (const auto& f : o.samples) samples.push_back(read_file(f));
  if (samples.empty()) {
    if (o.subject.empty()) throw PipelineError("--samples is required with --command");
    samples = SubjectRegistry::global().get(o.subject).samples;
  }
  QueryBudget budget;
  if (o.budget > 0) budget.max_queries = o.budget;
  Learner learner(*oracle, samples, *lattice, budget);
  for (const auto& q : learner.log())
    if (q.verdict != Verdict::Pass) throw PipelineError("oracle rejects sample " + q.purpose);
  auto out = generalize(g, learner);
  write_output(o.output, serialize(out));
  if (!o.log.empty()) {
    std::ostringstream text;
    write_query_log(text, learner.log());
    write_output(o.log, text.str());
  }
  std::cerr << "queries=" << learner.budget().used << " rewrites=" << learner.commits()
            << " reverted=" << learner.rejected_commits();
  if (learner.budget().exhausted()) std::cerr << " budget exhausted";
  std::cerr << '\n';
  return 0;
}

struct FuzzOptions {
  std::string grammar;
  std::size_t count = 100;
  std::uint64_t seed = 0;
  std::string out;
  std::string lattice;
  int max_depth = kDefaultMaxDepth;
};

int run_fuzz(const FuzzOptions& o) {
  auto lattice = load_lattice(o.lattice);
  auto g = parse_grammar(read_file(o.grammar));
  if (auto problems = g.validate(*lattice); !problems.empty()) throw PipelineError("invalid grammar: " + problems.front());
  fs::create_directories(o.out);
  for (std::size_t i = 0; i < o.count; ++i) {
    std::ostringstream name;
    name << "fuzz-" << std::setw(6) << std::setfill('0') << i << ".txt";
    write_output((fs::path(o.out) / name.str()).string(), produce(g, string_seed(o.seed, i), o.max_depth, *lattice));
  }
  return 0;
}

struct EvalOptions {
  std::string grammar;
  std::string subject;
  std::string golden;
  std::size_t count = kDefaultEvalCount;
  std::uint64_t seed = 0;
  std::string report;
  std::string lattice;
};

int run_eval(const EvalOptions& o) {
  auto lattice = load_lattice(o.lattice);
  auto g = parse_grammar(read_file(o.grammar));
  std::optional<Grammar> golden;
  if (!o.golden.empty()) golden = parse_grammar(read_file(o.golden));
  auto report = evaluate(g, fs::path(o.grammar).filename().string(), o.subject, golden ? &*golden : nullptr,
                         o.count, o.seed, *lattice);
  write_output(o.report, to_text(report));
  return 0;
}

int run_trace(const std::string& subject, const std::string& input) {
  auto text = input.empty() ? SubjectRegistry::global().get(subject).samples.front() : read_file(input);
  write_trace(std::cout, trace_run(subject, text));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mine, generalize and evaluate input grammars from instrumented parsers"};
  app.require_subcommand(1);

  MineOptions mine;
  auto* mine_cmd = app.add_subcommand("mine", "Trace inputs and derive a concrete grammar");
  mine_cmd->add_option("--subject", mine.subject, "Subject parser")->required();
  mine_cmd->add_option("--input", mine.inputs, "Sample input files (default: bundled sample)")->check(CLI::ExistingFile);
  mine_cmd->add_option("-o,--output", mine.output, "Grammar file (default: stdout)");
  mine_cmd->add_flag("--tree", mine.tree, "Print interval trees to stderr");

  GeneralizeOptions gen;
  auto* gen_cmd = app.add_subcommand("generalize", "Generalize a grammar with membership queries");
  gen_cmd->add_option("--subject", gen.subject, "Subject parser used as oracle");
  gen_cmd->add_option("--command", gen.command, "External oracle; exit status 0 accepts");
  gen_cmd->add_option("--grammar", gen.grammar, "Grammar to generalize")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--samples", gen.samples, "Samples the grammar was mined from")->check(CLI::ExistingFile);
  gen_cmd->add_option("--lattice", gen.lattice, "Token lattice file")->check(CLI::ExistingFile);
  gen_cmd->add_option("--budget", gen.budget, "Maximum oracle executions");
  gen_cmd->add_option("-o,--output", gen.output, "Grammar file (default: stdout)");
  gen_cmd->add_option("--log", gen.log, "Query log file");

  FuzzOptions fuzz;
  auto* fuzz_cmd = app.add_subcommand("fuzz", "Produce random inputs from a grammar");
  fuzz_cmd->add_option("--grammar", fuzz.grammar, "Grammar file")->required()->check(CLI::ExistingFile);
  fuzz_cmd->add_option("--count", fuzz.count, "Number of inputs");
  fuzz_cmd->add_option("--seed", fuzz.seed, "Random seed");
  fuzz_cmd->add_option("--out", fuzz.out, "Output directory")->required();
  fuzz_cmd->add_option("--lattice", fuzz.lattice, "Token lattice file")->check(CLI::ExistingFile);
  fuzz_cmd->add_option("--max-depth", fuzz.max_depth, "Expansion depth before shortest derivations");

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Measure soundness and completeness");
  eval_cmd->add_option("--grammar", ev.grammar, "Grammar file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--subject", ev.subject, "Subject parser")->required();
  eval_cmd->add_option("--golden", ev.golden, "Golden grammar file")->check(CLI::ExistingFile);
  eval_cmd->add_option("--count", ev.count, "Strings per measure");
  eval_cmd->add_option("--seed", ev.seed, "Random seed");
  eval_cmd->add_option("--report", ev.report, "Report file (default: stdout)");
  eval_cmd->add_option("--lattice", ev.lattice, "Token lattice file")->check(CLI::ExistingFile);

  std::string trace_subject, trace_input;
  auto* trace_cmd = app.add_subcommand("trace", "Dump the execution trace of one input");
  trace_cmd->add_option("--subject", trace_subject, "Subject parser")->required();
  trace_cmd->add_option("--input", trace_input, "Input file (default: bundled sample)")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
    if (*mine_cmd) check_subject(mine.subject);
    if (*gen_cmd) {
      if (gen.subject.empty() == gen.command.empty())
        throw CLI::ValidationError("generalize", "exactly one of --subject and --command is required");
      if (!gen.subject.empty()) check_subject(gen.subject);
    }
    if (*eval_cmd) check_subject(ev.subject);
    if (*trace_cmd) check_subject(trace_subject);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*mine_cmd) return run_mine(mine);
    if (*gen_cmd) return run_generalize(gen);
    if (*fuzz_cmd) return run_fuzz(fuzz);
    if (*eval_cmd) return run_eval(ev);
    if (*trace_cmd) return run_trace(trace_subject, trace_input);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPipelineError;
  }
  return kUsageError;
}
