#pragma once

// Optimal policy synthesis on a product MDP: accepting maximal end
// components, maximal reachability of their union, and the finite-memory
// strategy that results.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "ltlmdp/automata.hpp"
#include "ltlmdp/env.hpp"
#include "ltlmdp/error.hpp"
#include "ltlmdp/mdp.hpp"
#include "ltlmdp/product.hpp"
#include "ltlmdp/sparse_mdp.hpp"

namespace ltlmdp {

/// A closed, strongly connected sub-MDP.
struct EndComponent {
  std::vector<StateIndex> states;                // ascending
  std::vector<std::vector<ActionIndex>> actions;  // per entry of `states`, ascending

  bool operator==(const EndComponent&) const = default;

  const std::vector<ActionIndex>* actions_of(StateIndex s) const {
    auto it = std::lower_bound(states.begin(), states.end(), s);
    if (it == states.end() || *it != s) return nullptr;
    return &actions[static_cast<std::size_t>(it - states.begin())];
  }
};

/// Maximal end components of the sub-MDP on `restrict_to` minus `forbidden`
/// (empty vectors mean "all" and "none"). Repeatedly drops actions that
/// leave their state's SCC and states left without actions. Output is
/// ordered by smallest state.
inline std::vector<EndComponent> find_mecs(const SparseMdp& m, const std::vector<bool>& restrict_to = {},
                                           const std::vector<bool>& forbidden = {}) {
  const std::size_t n = m.state_count();
  std::vector<bool> alive(n, true);
  for (StateIndex s = 0; s < n; ++s) {
    if (!restrict_to.empty() && !restrict_to[s]) alive[s] = false;
    if (!forbidden.empty() && forbidden[s]) alive[s] = false;
  }
  // allowed[s] holds positions into m.choices[s].
  std::vector<std::vector<std::size_t>> allowed(n);
  for (StateIndex s = 0; s < n; ++s) {
    if (!alive[s]) continue;
    for (std::size_t i = 0; i < m.choices[s].size(); ++i) allowed[s].push_back(i);
  }

  std::vector<std::size_t> comp;
  for (bool changed = true; changed;) {
    changed = false;
    // Drop actions that can leave the live set, then states with none left,
    // until stable.
    for (bool dropped = true; dropped;) {
      dropped = false;
      for (StateIndex s = 0; s < n; ++s) {
        if (!alive[s]) continue;
        std::erase_if(allowed[s], [&](std::size_t i) {
          const auto& tr = m.choices[s][i].transitions;
          return std::any_of(tr.begin(), tr.end(), [&](const Transition& t) { return !alive[t.target]; });
        });
        if (allowed[s].empty()) {
          alive[s] = false;
          dropped = true;
          changed = true;
        }
      }
    }
    std::vector<std::vector<std::size_t>> graph(n);
    for (StateIndex s = 0; s < n; ++s) {
      if (!alive[s]) continue;
      for (auto i : allowed[s]) {
        for (const auto& t : m.choices[s][i].transitions) graph[s].push_back(t.target);
      }
    }
    comp = detail::scc_ids(graph);
    for (StateIndex s = 0; s < n; ++s) {
      if (!alive[s]) continue;
      auto before = allowed[s].size();
      std::erase_if(allowed[s], [&](std::size_t i) {
        const auto& tr = m.choices[s][i].transitions;
        return std::any_of(tr.begin(), tr.end(), [&](const Transition& t) { return comp[t.target] != comp[s]; });
      });
      if (allowed[s].size() != before) changed = true;
      if (allowed[s].empty()) {
        alive[s] = false;
        changed = true;
      }
    }
  }

  std::vector<EndComponent> out;
  std::vector<std::size_t> slot(n, static_cast<std::size_t>(-1));
  for (StateIndex s = 0; s < n; ++s) {
    if (!alive[s]) continue;
    std::size_t c = comp[s];
    if (slot[c] == static_cast<std::size_t>(-1)) {
      slot[c] = out.size();
      out.emplace_back();
    }
    auto& ec = out[slot[c]];
    ec.states.push_back(s);
    std::vector<ActionIndex> acts;
    for (auto i : allowed[s]) acts.push_back(m.choices[s][i].action);
    ec.actions.push_back(std::move(acts));
  }
  return out;
}

struct AcceptingMec {
  EndComponent component;
  std::size_t pair;  // Rabin pair the component satisfies
};

struct AcceptingMecs {
  std::vector<AcceptingMec> components;  // by pair, then by smallest state
  std::vector<bool> target;              // union of all component states
};

/// For every pair: MECs avoiding its L-states that contain a K-state.
inline AcceptingMecs accepting_mecs(const ProductMdp& p) {
  AcceptingMecs out;
  out.target.assign(p.state_count(), false);
  for (std::size_t i = 0; i < p.pairs.size(); ++i) {
    const auto& pair = p.pairs[i];
    if (std::find(pair.inf.begin(), pair.inf.end(), true) == pair.inf.end()) continue;
    for (auto& ec : find_mecs(p.graph, {}, pair.fin)) {
      bool hits = std::any_of(ec.states.begin(), ec.states.end(), [&](StateIndex s) { return pair.inf[s]; });
      if (!hits) continue;
      for (auto s : ec.states) out.target[s] = true;
      out.components.push_back({std::move(ec), i});
    }
  }
  return out;
}

/// States from which no policy reaches `target`.
inline std::vector<bool> dead_states(const SparseMdp& m, const std::vector<bool>& target) {
  const std::size_t n = m.state_count();
  std::vector<std::vector<std::size_t>> reverse(n);
  for (StateIndex s = 0; s < n; ++s) {
    for (const auto& c : m.choices[s]) {
      for (const auto& t : c.transitions) reverse[t.target].push_back(s);
    }
  }
  std::vector<bool> reaches(n, false);
  std::vector<StateIndex> work;
  for (StateIndex s = 0; s < n; ++s) {
    if (target[s]) {
      reaches[s] = true;
      work.push_back(s);
    }
  }
  while (!work.empty()) {
    auto s = work.back();
    work.pop_back();
    for (auto r : reverse[s]) {
      if (!reaches[r]) {
        reaches[r] = true;
        work.push_back(r);
      }
    }
  }
  std::vector<bool> dead(n);
  for (StateIndex s = 0; s < n; ++s) dead[s] = !reaches[s];
  return dead;
}

struct SolveOptions {
  double epsilon = 1e-10;              // value iteration stops below this sup-norm change
  std::size_t max_iterations = 1'000'000;
  double optimality_tolerance = 1e-8;  // actions this close to the maximum count as optimal
  bool polish = true;                  // refine by exact policy evaluation
};

struct ReachabilitySolution {
  std::vector<double> values;
  std::vector<bool> target;
  std::vector<bool> dead;
  std::vector<std::optional<ActionIndex>> optimal_action;  // empty on target and dead states
  std::size_t iterations = 0;
  double last_change = 0.0;
  bool monotone = true;  // every value iteration step was nondecreasing
};

namespace detail {

inline double action_value(const Choice& c, const std::vector<double>& x) {
  double v = 0.0;
  for (const auto& t : c.transitions) v += t.probability * x[t.target];
  return v;
}

inline double best_value(const SparseMdp& m, StateIndex s, const std::vector<double>& x) {
  double best = 0.0;
  for (const auto& c : m.choices[s]) best = std::max(best, action_value(c, x));
  return best;
}

// Among actions within `tol` of the best, picks the one whose closest
// successor is nearest to the target in the graph of such actions; ties go
// to the lower action index. Returns positions into m.choices[s].
inline std::vector<std::size_t> choose_actions(const SparseMdp& m, const std::vector<double>& x,
                                               const std::vector<bool>& target, const std::vector<bool>& dead,
                                               double tol) {
  const std::size_t n = m.state_count();
  std::vector<std::vector<std::size_t>> optimal(n);
  std::vector<std::vector<StateIndex>> reverse(n);
  for (StateIndex s = 0; s < n; ++s) {
    if (target[s] || dead[s]) continue;
    double best = best_value(m, s, x);
    for (std::size_t i = 0; i < m.choices[s].size(); ++i) {
      if (action_value(m.choices[s][i], x) >= best - tol) {
        optimal[s].push_back(i);
        for (const auto& t : m.choices[s][i].transitions) reverse[t.target].push_back(s);
      }
    }
  }
  constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(n, kFar);
  std::deque<StateIndex> queue;
  for (StateIndex s = 0; s < n; ++s) {
    if (target[s]) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    auto s = queue.front();
    queue.pop_front();
    for (auto r : reverse[s]) {
      if (dist[r] == kFar) {
        dist[r] = dist[s] + 1;
        queue.push_back(r);
      }
    }
  }
  std::vector<std::size_t> chosen(n, 0);
  for (StateIndex s = 0; s < n; ++s) {
    if (optimal[s].empty()) continue;
    std::size_t best_i = optimal[s].front();
    std::size_t best_d = kFar;
    for (auto i : optimal[s]) {
      std::size_t d = kFar;
      for (const auto& t : m.choices[s][i].transitions) d = std::min(d, dist[t.target]);
      if (d < best_d) {
        best_d = d;
        best_i = i;
      }
    }
    chosen[s] = best_i;
  }
  return chosen;
}

// Reachability probabilities of the stationary policy `chosen`. Returns
// nullopt when the linear system is singular (the policy gets stuck).
inline std::optional<std::vector<double>> evaluate_policy(const SparseMdp& m, const std::vector<std::size_t>& chosen,
                                                          const std::vector<bool>& target,
                                                          const std::vector<bool>& dead) {
  const std::size_t n = m.state_count();
  std::vector<std::ptrdiff_t> row(n, -1);
  std::ptrdiff_t k = 0;
  for (StateIndex s = 0; s < n; ++s) {
    if (!target[s] && !dead[s]) row[s] = k++;
  }
  std::vector<double> x(n, 0.0);
  for (StateIndex s = 0; s < n; ++s) {
    if (target[s]) x[s] = 1.0;
  }
  if (k == 0) return x;
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  for (StateIndex s = 0; s < n; ++s) {
    if (row[s] < 0) continue;
    entries.emplace_back(row[s], row[s], 1.0);
    for (const auto& t : m.choices[s][chosen[s]].transitions) {
      if (target[t.target]) {
        rhs[row[s]] += t.probability;
      } else if (row[t.target] >= 0) {
        entries.emplace_back(row[s], row[t.target], -t.probability);
      }
    }
  }
  Eigen::SparseMatrix<double> a(k, k);
  a.setFromTriplets(entries.begin(), entries.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) return std::nullopt;
  Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success) return std::nullopt;
  for (StateIndex s = 0; s < n; ++s) {
    if (row[s] < 0) continue;
    double v = sol[row[s]];
    if (!std::isfinite(v) || v < -1e-9 || v > 1.0 + 1e-9) return std::nullopt;
    x[s] = std::clamp(v, 0.0, 1.0);
  }
  return x;
}

}  // namespace detail

/// Maximal probability of reaching `target`, with `dead` fixed at 0.
///
/// Value iteration (Gauss-Seidel, from below) gives the least fixpoint of
/// the Bellman operator, which is the optimum of the linear program
///   min sum x  s.t.  x_p >= sum_t P(p,u,t) x_t  for all enabled u.
/// The result is then polished by exact evaluation and improvement of the
/// induced stationary policy.
inline ReachabilitySolution max_reachability(const SparseMdp& m, const std::vector<bool>& target,
                                             const std::vector<bool>& dead, const SolveOptions& options = {}) {
  const std::size_t n = m.state_count();
  if (target.size() != n || dead.size() != n) throw InputError("target and dead sets must cover every state");
  for (StateIndex s = 0; s < n; ++s) {
    if (target[s] && dead[s]) throw InputError("target and dead sets overlap at state " + std::to_string(s));
  }
  ReachabilitySolution sol;
  sol.target = target;
  sol.dead = dead;
  auto& x = sol.values;
  x.assign(n, 0.0);
  for (StateIndex s = 0; s < n; ++s) {
    if (target[s]) x[s] = 1.0;
  }

  std::vector<StateIndex> open;
  for (StateIndex s = 0; s < n; ++s) {
    if (!target[s] && !dead[s]) open.push_back(s);
  }
  double change = 0.0;
  do {
    if (sol.iterations >= options.max_iterations) {
      throw SolverError("value iteration did not converge in " + std::to_string(options.max_iterations) +
                            " iterations (last change " + std::to_string(change) + ")",
                        change);
    }
    change = 0.0;
    for (auto s : open) {
      double v = detail::best_value(m, s, x);
      if (v < x[s]) sol.monotone = false;
      change = std::max(change, std::abs(v - x[s]));
      x[s] = v;
    }
    ++sol.iterations;
  } while (change >= options.epsilon);
  sol.last_change = change;

  if (options.polish && !open.empty()) {
    auto chosen = detail::choose_actions(m, x, target, dead, options.optimality_tolerance);
    auto value = detail::evaluate_policy(m, chosen, target, dead);
    for (int round = 0; value && round < 100; ++round) {
      bool improved = false;
      for (auto s : open) {
        for (std::size_t i = 0; i < m.choices[s].size(); ++i) {
          if (detail::action_value(m.choices[s][i], *value) >
              detail::action_value(m.choices[s][chosen[s]], *value) + 1e-13) {
            chosen[s] = i;
            improved = true;
          }
        }
      }
      if (!improved) {
        // A fixpoint attained by a policy is the optimum.
        x = *value;
        break;
      }
      value = detail::evaluate_policy(m, chosen, target, dead);
    }
  }

  auto chosen = detail::choose_actions(m, x, target, dead, options.optimality_tolerance);
  sol.optimal_action.assign(n, std::nullopt);
  for (auto s : open) sol.optimal_action[s] = m.choices[s][chosen[s]].action;
  return sol;
}

/// Largest |x_p - max_u sum_t P(p,u,t) x_t| over states outside target and
/// dead sets.
inline double bellman_residual(const SparseMdp& m, const ReachabilitySolution& sol) {
  double r = 0.0;
  for (StateIndex s = 0; s < m.state_count(); ++s) {
    if (sol.target[s] || sol.dead[s]) continue;
    r = std::max(r, std::abs(sol.values[s] - detail::best_value(m, s, sol.values)));
  }
  return r;
}

enum class Region { Transient, Accepting, Dead };

/// Action tables for every product state. Transient and dead states have a
/// single action; states in an accepting MEC rotate through the MEC's
/// actions, one step per visit.
struct ProductPolicy {
  std::vector<Region> region;
  std::vector<std::size_t> component;  // accepting MEC index, for Accepting states
  std::vector<std::vector<ActionIndex>> actions;
  std::vector<double> value;
};

/// Combines the reachability policy with round-robin play inside accepting
/// MECs. A state in several MECs uses the first one listed.
inline ProductPolicy build_product_policy(const SparseMdp& m, const ReachabilitySolution& sol,
                                          const AcceptingMecs& amecs) {
  const std::size_t n = m.state_count();
  ProductPolicy pp;
  pp.region.assign(n, Region::Transient);
  pp.component.assign(n, static_cast<std::size_t>(-1));
  pp.actions.assign(n, {});
  pp.value = sol.values;
  for (std::size_t k = 0; k < amecs.components.size(); ++k) {
    const auto& ec = amecs.components[k].component;
    for (std::size_t i = 0; i < ec.states.size(); ++i) {
      StateIndex s = ec.states[i];
      if (pp.region[s] == Region::Accepting) continue;
      pp.region[s] = Region::Accepting;
      pp.component[s] = k;
      pp.actions[s] = ec.actions[i];
    }
  }
  for (StateIndex s = 0; s < n; ++s) {
    if (pp.region[s] == Region::Accepting) continue;
    if (sol.dead[s]) {
      pp.region[s] = Region::Dead;
      pp.actions[s] = {m.choices[s].front().action};
    } else if (sol.optimal_action[s]) {
      pp.actions[s] = {*sol.optimal_action[s]};
    } else {
      throw InputError("state " + std::to_string(s) + " is a target state outside every accepting MEC");
    }
  }
  return pp;
}

inline std::string region_name(const ProductPolicy& pp, StateIndex s) {
  switch (pp.region[s]) {
    case Region::Transient: return "TRANSIENT";
    case Region::Dead: return "DEAD";
    case Region::Accepting: return "AMEC#" + std::to_string(pp.component[s]);
  }
  return {};
}

/// One line per product state: index, (v,Z,q), region, action or
/// [round-robin list], value.
inline std::string dump_policy(const ProductPolicy& pp, const ProductMdp& p, const LabeledMdp& m) {
  std::ostringstream out;
  for (StateIndex s = 0; s < p.state_count(); ++s) {
    const auto& bm = p.back_map[s];
    std::string tuple = m.format_state(bm.mdp_state);
    tuple.insert(tuple.size() - 1, "," + std::to_string(bm.automaton_state));
    out << s << ' ' << tuple << ' ' << region_name(pp, s) << ' ';
    if (pp.region[s] == Region::Accepting) {
      out << '[';
      for (std::size_t i = 0; i < pp.actions[s].size(); ++i) {
        out << (i ? "," : "") << m.action_names.at(pp.actions[s][i]);
      }
      out << ']';
    } else {
      out << m.action_names.at(pp.actions[s].front());
    }
    out << ' ' << detail::fixed6(pp.value[s]) << "\n";
  }
  return out.str();
}

/// Everything the pipeline derives from a product MDP.
struct Synthesis {
  AcceptingMecs amecs;
  ReachabilitySolution solution;
  ProductPolicy policy;
  double probability = 0.0;
};

inline Synthesis synthesize(const ProductMdp& p, const SolveOptions& options = {}) {
  Synthesis out;
  out.amecs = accepting_mecs(p);
  auto dead = dead_states(p.graph, out.amecs.target);
  out.solution = max_reachability(p.graph, out.amecs.target, dead, options);
  out.policy = build_product_policy(p.graph, out.solution, out.amecs);
  for (StateIndex s = 0; s < p.state_count(); ++s) out.probability += p.graph.initial[s] * out.solution.values[s];
  return out;
}

/// Maximal probability that the MDP satisfies the automaton's condition:
/// the initial-weighted probability of reaching an accepting MEC.
inline double max_satisfaction_probability(const ProductMdp& p, const SolveOptions& options = {}) {
  return synthesize(p, options).probability;
}

/// Reactive strategy over (vertex, observation) pairs. Tracks the automaton
/// state and per-state visit counters; one instance per execution. The
/// referenced objects must outlive it.
class ControlStrategy {
 public:
  ControlStrategy(const LabeledMdp& mdp, const RabinAutomaton& dra, const ProductMdp& product,
                  const ProductPolicy& policy)
      : mdp_(&mdp),
        dra_(&dra),
        product_(&product),
        policy_(&policy),
        symbol_(label_symbols(mdp, dra)),
        visits_(product.state_count(), 0) {}

  /// Forgets the history; the next observation is treated as the first.
  void reset() {
    started_ = false;
    std::fill(visits_.begin(), visits_.end(), 0);
  }

  /// Action for observing `observed` at `v`. Throws ObservationError if the
  /// observation is impossible at `v` or leads outside the product.
  ActionIndex next(VertexIndex v, PropSet observed) {
    auto s = mdp_->find_state(v, observed);
    if (!s) {
      throw ObservationError("observation is not possible at vertex " +
                             (v < mdp_->vertex_names.size() ? mdp_->vertex_names[v] : std::to_string(v)));
    }
    StateIndex q = dra_->delta[started_ ? automaton_state_ : dra_->initial][symbol_[*s]];
    auto p = product_->find(*s, q);
    if (!p) throw ObservationError("observation sequence leaves the synthesized product");
    started_ = true;
    automaton_state_ = q;
    current_ = *p;
    const auto& acts = policy_->actions[*p];
    ActionIndex u = acts[visits_[*p] % acts.size()];
    ++visits_[*p];
    return u;
  }

  bool started() const noexcept { return started_; }
  StateIndex automaton_state() const noexcept { return automaton_state_; }
  StateIndex product_state() const noexcept { return current_; }
  Region region() const { return policy_->region.at(current_); }

 private:
  const LabeledMdp* mdp_;
  const RabinAutomaton* dra_;
  const ProductMdp* product_;
  const ProductPolicy* policy_;
  std::vector<std::size_t> symbol_;
  std::vector<std::size_t> visits_;
  bool started_ = false;
  StateIndex automaton_state_ = 0;
  StateIndex current_ = 0;
};

/// Projects the product policy onto the environment.
inline ControlStrategy induce_and_project(const ProductPolicy& pp, const ProductMdp& p, const LabeledMdp& m,
                                          const RabinAutomaton& d) {
  return ControlStrategy(m, d, p, pp);
}

}  // namespace ltlmdp
