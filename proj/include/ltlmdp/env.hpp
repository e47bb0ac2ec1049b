#pragma once

// Partitioned environment, robot motion model and probabilistic observation
// model, plus the JSON model document that carries all three.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "ltlmdp/error.hpp"
#include "ltlmdp/prop_set.hpp"

namespace ltlmdp {

inline constexpr double kDefaultProbabilityTolerance = 1e-9;
inline constexpr std::size_t kDefaultObservationCap = 20;

namespace detail {

inline std::optional<std::size_t> index_of(const std::vector<std::string>& names,
                                           std::string_view name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace detail

/// The graph E = (V, edges, props) with an initial vertex.
struct Environment {
  std::vector<std::string> vertices;
  std::vector<std::vector<VertexIndex>> edges;  // successors per vertex, declaration order
  std::vector<std::string> propositions;
  VertexIndex initial = 0;

  std::size_t vertex_count() const noexcept { return vertices.size(); }
  std::size_t proposition_count() const noexcept { return propositions.size(); }

  std::optional<VertexIndex> find_vertex(std::string_view name) const {
    return detail::index_of(vertices, name);
  }
  std::optional<PropIndex> find_proposition(std::string_view name) const {
    return detail::index_of(propositions, name);
  }
  bool has_edge(VertexIndex from, VertexIndex to) const {
    const auto& out = edges.at(from);
    return std::find(out.begin(), out.end(), to) != out.end();
  }

  /// Renders a proposition set as `{a,b}` using declared names.
  std::string format(PropSet set) const {
    std::string out = "{";
    bool first = true;
    for (auto p : set.members()) {
      if (!first) out += ',';
      out += propositions.at(p);
      first = false;
    }
    return out + "}";
  }

  bool operator==(const Environment&) const = default;
};

struct Outcome {
  VertexIndex target;
  double probability;

  bool operator==(const Outcome&) const = default;
};

/// Motion primitives, their availability per vertex and P_m.
struct MotionModel {
  std::vector<std::string> actions;
  std::vector<std::vector<ActionIndex>> enabled;       // per vertex, ascending
  std::vector<std::vector<std::vector<Outcome>>> rows;  // [vertex][action] -> outcomes by target

  std::optional<ActionIndex> find_action(std::string_view name) const {
    return detail::index_of(actions, name);
  }

  bool is_enabled(VertexIndex v, ActionIndex u) const {
    const auto& en = enabled.at(v);
    return std::binary_search(en.begin(), en.end(), u);
  }

  const std::vector<Outcome>& outcomes(VertexIndex v, ActionIndex u) const { return rows.at(v).at(u); }

  double probability(VertexIndex v, ActionIndex u, VertexIndex to) const {
    for (const auto& o : rows.at(v).at(u)) {
      if (o.target == to) return o.probability;
    }
    return 0.0;
  }

  bool operator==(const MotionModel&) const = default;
};

/// P_o, dense over vertices x propositions.
struct ObservationModel {
  std::vector<std::vector<double>> probability;  // [vertex][proposition]

  double at(VertexIndex v, PropIndex p) const { return probability.at(v).at(p); }

  bool operator==(const ObservationModel&) const = default;
};

/// One possible observation at a vertex together with its probability.
struct ObservationSet {
  VertexIndex vertex;
  PropSet observed;
  double probability;
};

/// The model triple as read from one document, plus the optional mission.
struct Model {
  Environment environment;
  MotionModel motion;
  ObservationModel observation;
  std::optional<std::string> formula;

  bool operator==(const Model&) const = default;
};

/// Checks every invariant of the triple. Throws ValidationError naming the
/// offending vertex, action or proposition.
inline void validate(const Model& model, double tolerance = kDefaultProbabilityTolerance) {
  const auto& env = model.environment;
  const auto& mm = model.motion;
  const auto& om = model.observation;
  const std::size_t nv = env.vertex_count();

  if (nv == 0) throw ValidationError("environment has no vertices");
  if (env.proposition_count() > kMaxPropositions) {
    throw ValidationError("at most " + std::to_string(kMaxPropositions) + " propositions are supported");
  }
  if (env.initial >= nv) throw ValidationError("initial vertex is not declared");
  if (env.edges.size() != nv || mm.enabled.size() != nv || mm.rows.size() != nv ||
      om.probability.size() != nv) {
    throw ValidationError("model tables do not match the vertex count");
  }
  for (VertexIndex v = 0; v < nv; ++v) {
    const auto& name = env.vertices[v];
    if (env.edges[v].empty()) throw ValidationError("vertex " + name + " has no outgoing edge");
    for (auto w : env.edges[v]) {
      if (w >= nv) throw ValidationError("vertex " + name + " has an edge to an undeclared vertex");
    }
    if (mm.enabled[v].empty()) throw ValidationError("vertex " + name + " enables no action");
    if (mm.rows[v].size() != mm.actions.size()) {
      throw ValidationError("motion table of vertex " + name + " does not match the action count");
    }
    if (om.probability[v].size() != env.proposition_count()) {
      throw ValidationError("observation table of vertex " + name + " does not match the proposition count");
    }
    for (PropIndex p = 0; p < env.proposition_count(); ++p) {
      double q = om.probability[v][p];
      if (!(q >= 0.0 && q <= 1.0)) {
        throw ValidationError("P_o(" + name + ", " + env.propositions[p] + ") is outside [0,1]");
      }
    }
    for (ActionIndex u = 0; u < mm.actions.size(); ++u) {
      const auto& row = mm.rows[v][u];
      const std::string where = "(" + name + ", " + mm.actions[u] + ")";
      double sum = 0.0;
      for (const auto& o : row) {
        if (o.target >= nv) throw ValidationError("motion row " + where + " targets an undeclared vertex");
        if (!(o.probability >= 0.0 && o.probability <= 1.0)) {
          throw ValidationError("motion row " + where + " has a probability outside [0,1]");
        }
        if (o.probability > 0.0 && !env.has_edge(v, o.target)) {
          throw ValidationError("motion row " + where + " moves to " + env.vertices[o.target] +
                                " without an edge");
        }
        sum += o.probability;
      }
      if (mm.is_enabled(v, u)) {
        if (std::abs(sum - 1.0) > tolerance) {
          std::ostringstream msg;
          msg.precision(12);
          msg << "motion row " << where << " sums to " << sum << ", expected 1";
          throw ValidationError(msg.str());
        }
      } else if (sum > 0.0) {
        throw ValidationError("motion row " + where + " has probability mass but the action is not enabled");
      }
    }
  }
}

/// Probability of observing exactly `observed` at `v`. Values of exactly 0
/// and 1 are handled symbolically.
inline double observation_probability(const ObservationModel& om, VertexIndex v, PropSet observed) {
  const auto& row = om.probability.at(v);
  double prob = 1.0;
  for (PropIndex p = 0; p < row.size(); ++p) {
    double q = row[p];
    bool in = observed.contains(p);
    if (q == 0.0) {
      if (in) return 0.0;
    } else if (q == 1.0) {
      if (!in) return 0.0;
    } else {
      prob *= in ? q : (1.0 - q);
    }
  }
  if ((observed.bits() >> row.size()) != 0) return 0.0;
  return prob;
}

/// Z_v: every observation at `v` with positive probability, ordered
/// lexicographically by the sorted proposition indices.
inline std::vector<ObservationSet> enumerate_observations(const Environment& env, const ObservationModel& om,
                                                          VertexIndex v,
                                                          std::size_t cap = kDefaultObservationCap) {
  if (v >= env.vertex_count()) throw InputError("vertex index out of range");
  const auto& row = om.probability.at(v);
  PropSet forced;
  std::vector<PropIndex> uncertain;
  for (PropIndex p = 0; p < row.size(); ++p) {
    if (row[p] == 1.0) {
      forced.insert(p);
    } else if (row[p] > 0.0) {
      uncertain.push_back(p);
    }
  }
  if (uncertain.size() > cap) {
    throw CapacityError("vertex " + env.vertices[v] + " has " + std::to_string(uncertain.size()) +
                        " uncertain propositions, more than the cap of " + std::to_string(cap));
  }
  std::vector<ObservationSet> out;
  out.reserve(std::size_t{1} << uncertain.size());
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << uncertain.size()); ++mask) {
    PropSet z = forced;
    double prob = 1.0;
    for (std::size_t i = 0; i < uncertain.size(); ++i) {
      double q = row[uncertain[i]];
      if ((mask >> i) & 1U) {
        z.insert(uncertain[i]);
        prob *= q;
      } else {
        prob *= 1.0 - q;
      }
    }
    if (prob > 0.0) out.push_back({v, z, prob});
  }
  std::sort(out.begin(), out.end(), [](const ObservationSet& a, const ObservationSet& b) {
    auto ma = a.observed.members();
    auto mb = b.observed.members();
    return std::lexicographical_compare(ma.begin(), ma.end(), mb.begin(), mb.end());
  });
  return out;
}

/// Union of Z_v over all vertices, sorted and deduplicated.
inline std::vector<PropSet> realizable_observations(const Model& model, std::size_t cap = kDefaultObservationCap) {
  std::vector<PropSet> out;
  for (VertexIndex v = 0; v < model.environment.vertex_count(); ++v) {
    for (const auto& z : enumerate_observations(model.environment, model.observation, v, cap)) {
      out.push_back(z.observed);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                                const std::string& where) {
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ParseError(where + ": unknown key '" + item.key() + "'");
    }
  }
}

inline const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing key '" + key + "'");
  return *it;
}

inline std::string require_string(const json& value, const std::string& where) {
  if (!value.is_string()) throw ParseError(where + ": expected a string");
  return value.get<std::string>();
}

inline double require_probability_literal(const json& value, const std::string& where) {
  if (!value.is_number()) throw ParseError(where + ": expected a decimal number");
  return value.get<double>();
}

inline std::vector<std::string> require_names(const json& value, const std::string& where) {
  if (!value.is_array()) throw ParseError(where + ": expected a list of names");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    out.push_back(require_string(value[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline void require_unique(const std::vector<std::string>& names, const std::string& what) {
  std::vector<std::string> sorted = names;
  std::sort(sorted.begin(), sorted.end());
  auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) throw ValidationError("duplicate " + what + " '" + *dup + "'");
}

inline std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace detail

/// Parses and validates a model document.
///
/// Declaration order of vertices, actions and propositions fixes every
/// downstream index. Throws ParseError for schema problems and
/// ValidationError for invariant violations.
inline Model load_environment(std::string_view text, double tolerance = kDefaultProbabilityTolerance) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, column] = detail::line_and_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("malformed JSON", line, column);
  }
  if (!doc.is_object()) throw ParseError("model: expected a JSON object");
  detail::reject_unknown_keys(doc, {"vertices", "actions", "propositions", "initial", "motion", "formula"},
                              "model");

  Model model;
  auto& env = model.environment;
  auto& mm = model.motion;
  auto& om = model.observation;

  mm.actions = detail::require_names(detail::require(doc, "actions", "model"), "actions");
  env.propositions = detail::require_names(detail::require(doc, "propositions", "model"), "propositions");
  detail::require_unique(mm.actions, "action");
  detail::require_unique(env.propositions, "proposition");
  if (env.propositions.size() > kMaxPropositions) {
    throw ValidationError("at most " + std::to_string(kMaxPropositions) + " propositions are supported");
  }

  const json& vertices = detail::require(doc, "vertices", "model");
  if (!vertices.is_array()) throw ParseError("vertices: expected a list");
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const std::string where = "vertices[" + std::to_string(i) + "]";
    if (!vertices[i].is_object()) throw ParseError(where + ": expected an object");
    detail::reject_unknown_keys(vertices[i], {"id", "edges", "enabled", "obs"}, where);
    env.vertices.push_back(detail::require_string(detail::require(vertices[i], "id", where), where + ".id"));
  }
  detail::require_unique(env.vertices, "vertex");

  const std::size_t nv = env.vertices.size();
  env.edges.resize(nv);
  mm.enabled.resize(nv);
  mm.rows.assign(nv, std::vector<std::vector<Outcome>>(mm.actions.size()));
  om.probability.assign(nv, std::vector<double>(env.propositions.size(), 0.0));

  for (std::size_t i = 0; i < nv; ++i) {
    const std::string where = "vertices[" + std::to_string(i) + "]";
    const json& vj = vertices[i];
    for (const auto& target : detail::require_names(detail::require(vj, "edges", where), where + ".edges")) {
      auto w = env.find_vertex(target);
      if (!w) throw ValidationError("vertex " + env.vertices[i] + " has an edge to undeclared vertex '" + target + "'");
      if (env.has_edge(i, *w)) throw ValidationError("vertex " + env.vertices[i] + " lists edge to " + target + " twice");
      env.edges[i].push_back(*w);
    }
    for (const auto& action : detail::require_names(detail::require(vj, "enabled", where), where + ".enabled")) {
      auto u = mm.find_action(action);
      if (!u) throw ValidationError("vertex " + env.vertices[i] + " enables undeclared action '" + action + "'");
      mm.enabled[i].push_back(*u);
    }
    std::sort(mm.enabled[i].begin(), mm.enabled[i].end());
    if (std::adjacent_find(mm.enabled[i].begin(), mm.enabled[i].end()) != mm.enabled[i].end()) {
      throw ValidationError("vertex " + env.vertices[i] + " enables an action twice");
    }
    if (auto it = vj.find("obs"); it != vj.end()) {
      if (!it->is_object()) throw ParseError(where + ".obs: expected an object");
      for (const auto& item : it->items()) {
        auto p = env.find_proposition(item.key());
        if (!p) {
          throw ValidationError("vertex " + env.vertices[i] + " observes undeclared proposition '" + item.key() + "'");
        }
        om.probability[i][*p] = detail::require_probability_literal(item.value(), where + ".obs." + item.key());
      }
    }
  }

  const std::string initial = detail::require_string(detail::require(doc, "initial", "model"), "initial");
  auto v0 = env.find_vertex(initial);
  if (!v0) throw ValidationError("initial vertex '" + initial + "' is not declared");
  env.initial = *v0;

  const json& motion = detail::require(doc, "motion", "model");
  if (!motion.is_array()) throw ParseError("motion: expected a list");
  for (std::size_t i = 0; i < motion.size(); ++i) {
    const std::string where = "motion[" + std::to_string(i) + "]";
    const json& mj = motion[i];
    if (!mj.is_object()) throw ParseError(where + ": expected an object");
    detail::reject_unknown_keys(mj, {"from", "action", "to", "prob"}, where);
    auto from_name = detail::require_string(detail::require(mj, "from", where), where + ".from");
    auto action_name = detail::require_string(detail::require(mj, "action", where), where + ".action");
    auto to_name = detail::require_string(detail::require(mj, "to", where), where + ".to");
    double prob = detail::require_probability_literal(detail::require(mj, "prob", where), where + ".prob");
    auto from = env.find_vertex(from_name);
    auto to = env.find_vertex(to_name);
    auto u = mm.find_action(action_name);
    if (!from) throw ValidationError(where + ": undeclared vertex '" + from_name + "'");
    if (!to) throw ValidationError(where + ": undeclared vertex '" + to_name + "'");
    if (!u) throw ValidationError(where + ": undeclared action '" + action_name + "'");
    auto& row = mm.rows[*from][*u];
    for (const auto& o : row) {
      if (o.target == *to) {
        throw ValidationError(where + ": duplicate entry for (" + from_name + ", " + action_name + ", " + to_name + ")");
      }
    }
    if (prob != 0.0) row.push_back({*to, prob});
  }
  for (auto& per_vertex : mm.rows) {
    for (auto& row : per_vertex) {
      std::sort(row.begin(), row.end(), [](const Outcome& a, const Outcome& b) { return a.target < b.target; });
    }
  }

  if (auto it = doc.find("formula"); it != doc.end()) model.formula = detail::require_string(*it, "formula");

  validate(model, tolerance);
  return model;
}

inline Model load_environment_file(const std::string& path, double tolerance = kDefaultProbabilityTolerance) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_environment(buffer.str(), tolerance);
}

/// Writes the model document. Loading the result reproduces `model`.
inline std::string serialize(const Model& model) {
  using detail::json;
  const auto& env = model.environment;
  const auto& mm = model.motion;
  json doc = json::object();
  json vertices = json::array();
  for (VertexIndex v = 0; v < env.vertex_count(); ++v) {
    json vj = json::object();
    vj["id"] = env.vertices[v];
    json edges = json::array();
    for (auto w : env.edges[v]) edges.push_back(env.vertices[w]);
    vj["edges"] = edges;
    json enabled = json::array();
    for (auto u : mm.enabled[v]) enabled.push_back(mm.actions[u]);
    vj["enabled"] = enabled;
    json obs = json::object();
    for (PropIndex p = 0; p < env.proposition_count(); ++p) {
      if (model.observation.probability[v][p] != 0.0) obs[env.propositions[p]] = model.observation.probability[v][p];
    }
    vj["obs"] = obs;
    vertices.push_back(vj);
  }
  doc["vertices"] = vertices;
  doc["actions"] = mm.actions;
  doc["propositions"] = env.propositions;
  doc["initial"] = env.vertices[env.initial];
  json motion = json::array();
  for (VertexIndex v = 0; v < env.vertex_count(); ++v) {
    for (ActionIndex u = 0; u < mm.actions.size(); ++u) {
      for (const auto& o : mm.rows[v][u]) {
        motion.push_back({{"from", env.vertices[v]},
                          {"action", mm.actions[u]},
                          {"to", env.vertices[o.target]},
                          {"prob", o.probability}});
      }
    }
  }
  doc["motion"] = motion;
  if (model.formula) doc["formula"] = *model.formula;
  return doc.dump(2) + "\n";
}

}  // namespace ltlmdp
