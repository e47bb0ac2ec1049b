#pragma once

// Labeled MDP built from an environment model. A state is a vertex paired
// with one of its possible observations; its label is that observation.

#include <cstddef>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ltlmdp/env.hpp"
#include "ltlmdp/error.hpp"
#include "ltlmdp/sparse_mdp.hpp"

namespace ltlmdp {

struct MdpState {
  VertexIndex vertex;
  PropSet observation;

  bool operator==(const MdpState&) const = default;
};

struct LabeledMdp {
  SparseMdp graph;
  std::vector<MdpState> states;  // vertex order, then observation order
  std::vector<std::size_t> vertex_offset;  // states of v are [offset[v], offset[v+1])
  std::vector<std::string> vertex_names;
  std::vector<std::string> action_names;
  std::vector<std::string> propositions;

  std::size_t state_count() const noexcept { return states.size(); }
  PropSet label(StateIndex s) const { return states.at(s).observation; }

  std::optional<StateIndex> find_state(VertexIndex v, PropSet observation) const {
    if (v + 1 >= vertex_offset.size()) return std::nullopt;
    for (std::size_t s = vertex_offset[v]; s < vertex_offset[v + 1]; ++s) {
      if (states[s].observation == observation) return s;
    }
    return std::nullopt;
  }

  std::string format_state(StateIndex s) const {
    std::string out = "(" + vertex_names.at(states.at(s).vertex) + ",{";
    bool first = true;
    for (auto p : states[s].observation.members()) {
      if (!first) out += ',';
      out += propositions.at(p);
      first = false;
    }
    return out + "})";
  }
};

/// Builds the labeled MDP: states (v, Z) for Z in Z_v, kernel
/// P_m(v,u,v') * Pr[Z' at v'], and an initial distribution over the
/// observations at the initial vertex.
inline LabeledMdp build_mdp(const Model& model, std::size_t observation_cap = kDefaultObservationCap) {
  const auto& env = model.environment;
  const auto& mm = model.motion;
  LabeledMdp m;
  m.vertex_names = env.vertices;
  m.action_names = mm.actions;
  m.propositions = env.propositions;

  std::vector<std::vector<ObservationSet>> observations;
  m.vertex_offset.push_back(0);
  for (VertexIndex v = 0; v < env.vertex_count(); ++v) {
    observations.push_back(enumerate_observations(env, model.observation, v, observation_cap));
    for (const auto& z : observations.back()) m.states.push_back({v, z.observed});
    m.vertex_offset.push_back(m.states.size());
  }

  auto& g = m.graph;
  g.action_count = mm.actions.size();
  g.choices.resize(m.states.size());
  g.initial.assign(m.states.size(), 0.0);
  for (StateIndex s = 0; s < m.states.size(); ++s) {
    const VertexIndex v = m.states[s].vertex;
    for (ActionIndex u : mm.enabled[v]) {
      Choice c{u, {}};
      for (const auto& o : mm.outcomes(v, u)) {
        const auto& zs = observations[o.target];
        for (std::size_t k = 0; k < zs.size(); ++k) {
          c.transitions.push_back({m.vertex_offset[o.target] + k, o.probability * zs[k].probability});
        }
      }
      g.choices[s].push_back(std::move(c));
    }
  }
  const auto& z0 = observations[env.initial];
  for (std::size_t k = 0; k < z0.size(); ++k) g.initial[m.vertex_offset[env.initial] + k] = z0[k].probability;
  return m;
}

/// A finite path s_0 ... s_n together with the actions u_0 ... u_{n-1}.
struct FinitePath {
  std::vector<StateIndex> states;
  std::vector<ActionIndex> actions;
};

/// iota(s_0) * prod P(s_i, u_i, s_{i+1}). Throws InputError when the path
/// is not a path of `m`.
inline double path_probability(const SparseMdp& m, const FinitePath& path) {
  if (path.states.empty() || path.actions.size() + 1 != path.states.size()) {
    throw InputError("a path needs one more state than actions");
  }
  for (auto s : path.states) {
    if (s >= m.state_count()) throw InputError("path visits an undeclared state");
  }
  double prob = m.initial[path.states.front()];
  if (prob <= 0.0) throw InputError("path does not start in an initial state");
  for (std::size_t i = 0; i < path.actions.size(); ++i) {
    double step = m.probability(path.states[i], path.actions[i], path.states[i + 1]);
    if (step <= 0.0) throw InputError("path takes a zero-probability step at position " + std::to_string(i));
    prob *= step;
  }
  return prob;
}

inline double path_probability(const LabeledMdp& m, const FinitePath& path) {
  return path_probability(m.graph, path);
}

namespace detail {

inline std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace detail

/// Deterministic text listing: one header line per state (index, (v,Z),
/// initial probability) followed by one line per enabled action.
inline std::string dump(const LabeledMdp& m) {
  std::ostringstream out;
  out << "states " << m.state_count() << "\n";
  out << "actions";
  for (const auto& a : m.action_names) out << ' ' << a;
  out << "\n";
  for (StateIndex s = 0; s < m.state_count(); ++s) {
    out << "s " << s << ' ' << m.format_state(s) << " init " << detail::fixed6(m.graph.initial[s]) << "\n";
    for (const auto& c : m.graph.choices[s]) {
      out << "  " << m.action_names.at(c.action) << " ->";
      for (const auto& t : c.transitions) out << ' ' << t.target << ':' << detail::fixed6(t.probability);
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace ltlmdp
