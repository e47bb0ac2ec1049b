#pragma once

// Product of a labeled MDP with a deterministic Rabin automaton. The
// automaton reads the label of every state the MDP enters, including the
// initial one.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ltlmdp/automata.hpp"
#include "ltlmdp/error.hpp"
#include "ltlmdp/mdp.hpp"
#include "ltlmdp/sparse_mdp.hpp"

namespace ltlmdp {

struct ProductState {
  StateIndex mdp_state;
  StateIndex automaton_state;

  bool operator==(const ProductState&) const = default;
};

/// Lifted Rabin pair as membership flags over product states.
struct ProductPair {
  std::vector<bool> fin;
  std::vector<bool> inf;

  std::size_t fin_count() const { return static_cast<std::size_t>(std::count(fin.begin(), fin.end(), true)); }
  std::size_t inf_count() const { return static_cast<std::size_t>(std::count(inf.begin(), inf.end(), true)); }
};

struct ProductMdp {
  SparseMdp graph;
  std::vector<ProductState> back_map;
  std::vector<ProductPair> pairs;
  std::size_t automaton_state_count = 0;

  std::size_t state_count() const noexcept { return back_map.size(); }

  std::optional<StateIndex> find(StateIndex mdp_state, StateIndex automaton_state) const {
    auto it = index_.find(key(mdp_state, automaton_state));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  StateIndex add_state(ProductState ps) {
    StateIndex id = back_map.size();
    back_map.push_back(ps);
    index_.emplace(key(ps.mdp_state, ps.automaton_state), id);
    return id;
  }

 private:
  std::uint64_t key(StateIndex s, StateIndex q) const {
    return static_cast<std::uint64_t>(s) * automaton_state_count + q;
  }

  std::unordered_map<std::uint64_t, StateIndex> index_;
};

struct ProductOptions {
  /// Keep only states reachable from the initial support. Without pruning
  /// every pair (s, q) is materialized, numbered s * |Q| + q.
  bool prune = true;
};

/// Maps each MDP state's label to the automaton's symbol position. Throws
/// InputError when an automaton proposition is unknown to the MDP or a
/// label is outside the automaton alphabet.
inline std::vector<std::size_t> label_symbols(const LabeledMdp& m, const RabinAutomaton& d) {
  std::vector<PropIndex> source;  // MDP proposition index of each automaton proposition
  for (const auto& ap : d.propositions) {
    auto it = std::find(m.propositions.begin(), m.propositions.end(), ap);
    if (it == m.propositions.end()) throw InputError("automaton proposition '" + ap + "' is not declared by the model");
    source.push_back(static_cast<PropIndex>(it - m.propositions.begin()));
  }
  std::vector<std::size_t> out(m.state_count());
  for (StateIndex s = 0; s < m.state_count(); ++s) {
    PropSet symbol;
    for (std::size_t i = 0; i < source.size(); ++i) {
      if (m.label(s).contains(source[i])) symbol.insert(i);
    }
    auto pos = d.symbol_position(symbol);
    if (!pos) throw InputError("label of state " + m.format_state(s) + " is outside the automaton alphabet");
    out[s] = *pos;
  }
  return out;
}

/// The labels of `m` as symbols over the automaton propositions `props`.
/// Used to restrict an automaton to what the model can produce.
inline std::vector<PropSet> realizable_symbols(const LabeledMdp& m, const std::vector<std::string>& props) {
  std::vector<PropSet> out;
  for (StateIndex s = 0; s < m.state_count(); ++s) {
    PropSet symbol;
    for (std::size_t i = 0; i < props.size(); ++i) {
      auto it = std::find(m.propositions.begin(), m.propositions.end(), props[i]);
      if (it != m.propositions.end() &&
          m.label(s).contains(static_cast<PropIndex>(it - m.propositions.begin()))) {
        symbol.insert(i);
      }
    }
    out.push_back(symbol);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Builds M x R. With pruning, states are numbered breadth-first from the
/// initial states (ascending MDP state), successors in action then target
/// order.
inline ProductMdp build_product(const LabeledMdp& m, const RabinAutomaton& d, const ProductOptions& options = {}) {
  const auto symbol = label_symbols(m, d);
  const std::size_t nq = d.state_count();
  ProductMdp p;
  p.automaton_state_count = nq;
  p.graph.action_count = m.graph.action_count;

  auto target_of = [&](StateIndex s_next, StateIndex q) { return ProductState{s_next, d.delta[q][symbol[s_next]]}; };

  if (options.prune) {
    std::vector<StateIndex> queue;
    for (StateIndex s = 0; s < m.state_count(); ++s) {
      if (m.graph.initial[s] <= 0.0) continue;
      ProductState ps = target_of(s, d.initial);
      if (!p.find(ps.mdp_state, ps.automaton_state)) queue.push_back(p.add_state(ps));
    }
    for (std::size_t i = 0; i < queue.size(); ++i) {
      auto [s, q] = p.back_map[queue[i]];
      for (const auto& c : m.graph.choices[s]) {
        for (const auto& t : c.transitions) {
          ProductState ps = target_of(t.target, q);
          if (!p.find(ps.mdp_state, ps.automaton_state)) queue.push_back(p.add_state(ps));
        }
      }
    }
  } else {
    for (StateIndex s = 0; s < m.state_count(); ++s) {
      for (StateIndex q = 0; q < nq; ++q) p.add_state({s, q});
    }
  }

  const std::size_t n = p.state_count();
  p.graph.choices.resize(n);
  p.graph.initial.assign(n, 0.0);
  for (StateIndex i = 0; i < n; ++i) {
    auto [s, q] = p.back_map[i];
    if (m.graph.initial[s] > 0.0 && d.delta[d.initial][symbol[s]] == q) p.graph.initial[i] = m.graph.initial[s];
    for (const auto& c : m.graph.choices[s]) {
      Choice pc{c.action, {}};
      for (const auto& t : c.transitions) {
        ProductState ps = target_of(t.target, q);
        pc.transitions.push_back({*p.find(ps.mdp_state, ps.automaton_state), t.probability});
      }
      std::sort(pc.transitions.begin(), pc.transitions.end(),
                [](const Transition& a, const Transition& b) { return a.target < b.target; });
      p.graph.choices[i].push_back(std::move(pc));
    }
  }

  for (const auto& pair : d.pairs) {
    std::vector<bool> in_fin(nq, false), in_inf(nq, false);
    for (auto q : pair.fin) in_fin[q] = true;
    for (auto q : pair.inf) in_inf[q] = true;
    ProductPair pp{std::vector<bool>(n), std::vector<bool>(n)};
    for (StateIndex i = 0; i < n; ++i) {
      pp.fin[i] = in_fin[p.back_map[i].automaton_state];
      pp.inf[i] = in_inf[p.back_map[i].automaton_state];
    }
    p.pairs.push_back(std::move(pp));
  }
  return p;
}

/// Size summary: state count, pair count and per-pair set sizes.
inline std::string stats(const ProductMdp& p) {
  std::ostringstream out;
  out << "states " << p.state_count() << "\n";
  out << "pairs " << p.pairs.size() << "\n";
  for (std::size_t i = 0; i < p.pairs.size(); ++i) {
    out << "pair " << i << " L " << p.pairs[i].fin_count() << " K " << p.pairs[i].inf_count() << "\n";
  }
  return out.str();
}

}  // namespace ltlmdp
