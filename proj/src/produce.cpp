#include <algorithm>
#include <limits>
#include <random>

#include "grammine/grammar.hpp"

namespace grammine {

namespace {

constexpr int kUnbounded = std::numeric_limits<int>::max() / 2;

class Producer {
 public:
  Producer(const Grammar& g, std::uint64_t seed, int max_depth, const TokenLattice& lattice)
      : g_(g), lattice_(lattice), rng_(seed), max_depth_(max_depth) {
    compute_heights();
    for (int id : g_.reachable())
      if (height_.at(id) >= kUnbounded)
        throw NonProductiveGrammar(g_.rule(id).name + " derives no finite string");
  }

  std::string run() {
    expand_nt(g_.start, 0);
    return std::move(out_);
  }

 private:
  int seq_height(const std::vector<Element>& seq) const {
    int h = 0;
    for (const auto& e : seq) h = std::max(h, element_height(e));
    return h;
  }

  int element_height(const Element& e) const {
    switch (e.kind) {
      case Element::Kind::NtRef: {
        auto it = height_.find(e.nt);
        return it == height_.end() ? kUnbounded : it->second;
      }
      case Element::Kind::Repeat: return e.min == 0 ? 0 : seq_height(e.body);
      default: return 0;
    }
  }

  void compute_heights() {
    for (const auto& [id, r] : g_.rules) height_[id] = kUnbounded;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [id, r] : g_.rules) {
        for (const auto& alt : r.alternatives) {
          int h = seq_height(alt);
          if (h < kUnbounded && h + 1 < height_[id]) {
            height_[id] = h + 1;
            changed = true;
          }
        }
      }
    }
  }

  void expand_nt(int nt, int depth) {
    const auto& alts = g_.rule(nt).alternatives;
    bool minimal = depth >= max_depth_;
    std::size_t pick = 0;
    if (minimal) {
      int best = kUnbounded;
      for (std::size_t i = 0; i < alts.size(); ++i) {
        int h = seq_height(alts[i]);
        if (h < best) {
          best = h;
          pick = i;
        }
      }
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, alts.size() - 1)(rng_);
    }
    expand_seq(alts[pick], depth + 1);
  }

  void expand_seq(const std::vector<Element>& seq, int depth) {
    bool minimal = depth >= max_depth_;
    for (const auto& e : seq) {
      switch (e.kind) {
        case Element::Kind::Terminal: out_ += e.text; break;
        case Element::Kind::TokenRef: out_ += lattice_.get(e.text).pattern.sample(rng_, minimal); break;
        case Element::Kind::NtRef: expand_nt(e.nt, depth); break;
        case Element::Kind::Optional:
          if (!minimal && coin_(rng_)) expand_seq(e.body, depth);
          break;
        case Element::Kind::Repeat: {
          int count = e.min;
          if (!minimal)
            while (coin_(rng_)) ++count;
          for (int i = 0; i < count; ++i) expand_seq(e.body, depth);
          break;
        }
      }
    }
  }

  const Grammar& g_;
  const TokenLattice& lattice_;
  std::mt19937_64 rng_;
  std::bernoulli_distribution coin_{0.5};
  int max_depth_;
  std::map<int, int> height_;
  std::string out_;
};

}  // namespace

std::string produce(const Grammar& g, std::uint64_t seed, int max_depth, const TokenLattice& lattice) {
  if (!g.rules.count(g.start)) throw GrammarError("start symbol has no rule");
  return Producer(g, seed, max_depth, lattice).run();
}

}  // namespace grammine
