#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ltlmdp/error.hpp"
#include "ltlmdp/prop_set.hpp"

namespace ltlmdp {

struct Transition {
  StateIndex target;
  double probability;

  bool operator==(const Transition&) const = default;
};

/// One enabled action with its nonzero successor distribution.
struct Choice {
  ActionIndex action;
  std::vector<Transition> transitions;  // ascending by target

  bool operator==(const Choice&) const = default;
};

/// Finite MDP with a sparse kernel. Actions not listed for a state are not
/// enabled there; zero-probability successors are never stored.
struct SparseMdp {
  std::size_t action_count = 0;
  std::vector<std::vector<Choice>> choices;  // per state, ascending by action
  std::vector<double> initial;

  std::size_t state_count() const noexcept { return choices.size(); }

  const Choice* choice(StateIndex s, ActionIndex a) const {
    for (const auto& c : choices.at(s)) {
      if (c.action == a) return &c;
    }
    return nullptr;
  }

  double probability(StateIndex s, ActionIndex a, StateIndex t) const {
    if (const Choice* c = choice(s, a)) {
      for (const auto& tr : c->transitions) {
        if (tr.target == t) return tr.probability;
      }
    }
    return 0.0;
  }

  /// Successor lists ignoring actions and probabilities.
  std::vector<std::vector<std::size_t>> support_graph() const {
    std::vector<std::vector<std::size_t>> g(state_count());
    for (StateIndex s = 0; s < state_count(); ++s) {
      for (const auto& c : choices[s]) {
        for (const auto& t : c.transitions) g[s].push_back(t.target);
      }
      std::sort(g[s].begin(), g[s].end());
      g[s].erase(std::unique(g[s].begin(), g[s].end()), g[s].end());
    }
    return g;
  }

  bool operator==(const SparseMdp&) const = default;
};

/// Row sums, nonempty action sets and the initial distribution.
inline void check_stochastic(const SparseMdp& m, double tolerance) {
  if (m.initial.size() != m.state_count()) throw ValidationError("initial distribution has the wrong size");
  double init = 0.0;
  for (double p : m.initial) init += p;
  if (std::abs(init - 1.0) > tolerance) throw ValidationError("initial distribution does not sum to 1");
  for (StateIndex s = 0; s < m.state_count(); ++s) {
    if (m.choices[s].empty()) throw ValidationError("state " + std::to_string(s) + " enables no action");
    for (const auto& c : m.choices[s]) {
      double sum = 0.0;
      for (const auto& t : c.transitions) {
        if (t.target >= m.state_count()) throw ValidationError("transition to undeclared state");
        sum += t.probability;
      }
      if (std::abs(sum - 1.0) > tolerance) {
        throw ValidationError("row (" + std::to_string(s) + ", " + std::to_string(c.action) + ") does not sum to 1");
      }
    }
  }
}

}  // namespace ltlmdp
