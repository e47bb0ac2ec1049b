#pragma once

// LTL to deterministic Rabin automata.
//
// Pipeline: NNF formula -> generalized Buchi tableau -> degeneralized
// Buchi automaton -> Safra trees -> Rabin automaton. Alphabets are explicit
// sets of proposition sets; a DRA may run on a subset of 2^AP once it has
// been restricted to the symbols an environment can produce.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ltlmdp/error.hpp"
#include "ltlmdp/ltl.hpp"
#include "ltlmdp/prop_set.hpp"

namespace ltlmdp {

inline constexpr std::size_t kDefaultDraStateCap = 1'000'000;
inline constexpr std::size_t kMaxFullAlphabetPropositions = 16;

/// Edge guarded by a cube: every `positive` proposition holds and no
/// `negative` one does.
struct BuchiEdge {
  PropSet positive;
  PropSet negative;
  StateIndex target;

  bool matches(PropSet symbol) const noexcept {
    return positive.subset_of(symbol) && (negative & symbol).empty();
  }
  bool operator==(const BuchiEdge&) const = default;
  auto operator<=>(const BuchiEdge&) const = default;
};

/// Nondeterministic Buchi automaton over 2^propositions.
struct BuchiAutomaton {
  std::vector<std::string> propositions;
  std::vector<std::vector<BuchiEdge>> edges;  // outgoing, per state
  std::vector<StateIndex> initial;
  std::vector<bool> accepting;

  std::size_t state_count() const noexcept { return edges.size(); }

  std::vector<StateIndex> successors(StateIndex q, PropSet symbol) const {
    std::vector<StateIndex> out;
    for (const auto& e : edges.at(q)) {
      if (e.matches(symbol)) out.push_back(e.target);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

/// One Rabin pair: accepting runs visit `fin` finitely often and `inf`
/// infinitely often. Both lists are sorted.
struct RabinPair {
  std::vector<StateIndex> fin;
  std::vector<StateIndex> inf;

  bool operator==(const RabinPair&) const = default;
};

/// Deterministic Rabin automaton, complete over `alphabet`.
struct RabinAutomaton {
  std::vector<std::string> propositions;
  std::vector<PropSet> alphabet;               // sorted, symbols over `propositions`
  std::vector<std::vector<StateIndex>> delta;  // [state][symbol position]
  StateIndex initial = 0;
  std::vector<RabinPair> pairs;

  std::size_t state_count() const noexcept { return delta.size(); }

  std::optional<std::size_t> symbol_position(PropSet symbol) const {
    auto it = std::lower_bound(alphabet.begin(), alphabet.end(), symbol);
    if (it == alphabet.end() || *it != symbol) return std::nullopt;
    return static_cast<std::size_t>(it - alphabet.begin());
  }

  StateIndex step(StateIndex q, PropSet symbol) const {
    auto k = symbol_position(symbol);
    if (!k) throw InputError("symbol is not in the automaton alphabet");
    return delta.at(q)[*k];
  }

  std::size_t transition_count() const noexcept { return delta.size() * alphabet.size(); }

  bool operator==(const RabinAutomaton&) const = default;
};

/// All 2^|props| symbols in increasing order.
inline std::vector<PropSet> full_alphabet(std::size_t proposition_count) {
  if (proposition_count > kMaxFullAlphabetPropositions) {
    throw CapacityError("full alphabet over " + std::to_string(proposition_count) +
                        " propositions is too large; restrict it to realizable symbols");
  }
  std::vector<PropSet> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << proposition_count); ++m) out.emplace_back(m);
  return out;
}

/// Checks totality and determinism over the alphabet and pair bounds.
inline void check_well_formed(const RabinAutomaton& d) {
  if (d.state_count() == 0) throw InputError("automaton has no states");
  if (d.initial >= d.state_count()) throw InputError("initial state out of range");
  if (!std::is_sorted(d.alphabet.begin(), d.alphabet.end()) ||
      std::adjacent_find(d.alphabet.begin(), d.alphabet.end()) != d.alphabet.end()) {
    throw InputError("alphabet must be sorted and duplicate free");
  }
  for (const auto& row : d.delta) {
    if (row.size() != d.alphabet.size()) throw InputError("transition function is not total");
    for (auto t : row) {
      if (t >= d.state_count()) throw InputError("transition to undeclared state");
    }
  }
  for (const auto& p : d.pairs) {
    for (const auto* set : {&p.fin, &p.inf}) {
      for (auto q : *set) {
        if (q >= d.state_count()) throw InputError("Rabin pair references undeclared state");
      }
    }
  }
}

namespace detail {

// Interned NNF subformulas; equal subtrees share an id.
class Closure {
 public:
  int intern(const ltl::Formula& f) {
    int l = f.args.size() > 0 ? intern(f.args[0]) : -1;
    int r = f.args.size() > 1 ? intern(f.args[1]) : -1;
    std::string key = ltl::to_string(f);
    if (auto it = ids_.find(key); it != ids_.end()) return it->second;
    int id = static_cast<int>(ops_.size());
    ops_.push_back(f.op);
    names_.push_back(f.op == ltl::Op::Atom ? f.name : std::string());
    lhs_.push_back(l);
    rhs_.push_back(r);
    ids_.emplace(std::move(key), id);
    return id;
  }

  std::size_t size() const noexcept { return ops_.size(); }
  ltl::Op op(int id) const { return ops_[static_cast<std::size_t>(id)]; }
  const std::string& name(int id) const { return names_[static_cast<std::size_t>(id)]; }
  int lhs(int id) const { return lhs_[static_cast<std::size_t>(id)]; }
  int rhs(int id) const { return rhs_[static_cast<std::size_t>(id)]; }

  bool is_literal(int id) const {
    return op(id) == ltl::Op::Atom || (op(id) == ltl::Op::Not && op(lhs(id)) == ltl::Op::Atom);
  }

  /// Atom of a literal.
  const std::string& literal_atom(int id) const { return op(id) == ltl::Op::Atom ? name(id) : name(lhs(id)); }

 private:
  std::vector<ltl::Op> ops_;
  std::vector<std::string> names_;
  std::vector<int> lhs_;
  std::vector<int> rhs_;
  std::unordered_map<std::string, int> ids_;
};

struct TableauNode {
  std::set<int> incoming;  // kInit marks the initial pseudo-node
  std::set<int> pending;
  std::set<int> old;
  std::set<int> next;
};

inline constexpr int kInit = -1;

struct Tableau {
  std::vector<std::set<int>> old;
  std::vector<std::set<int>> incoming;
};

// On-the-fly tableau expansion (Gerth, Peled, Vardi, Wolper).
inline Tableau expand_tableau(const Closure& cl, int root) {
  Tableau out;
  std::map<std::pair<std::set<int>, std::set<int>>, std::size_t> finished;
  std::vector<TableauNode> stack;
  stack.push_back({{kInit}, {root}, {}, {}});

  auto has_complement = [&](const std::set<int>& old, int lit) {
    const bool negative = cl.op(lit) == ltl::Op::Not;
    const std::string& atom = cl.literal_atom(lit);
    for (int o : old) {
      if (!cl.is_literal(o) || cl.literal_atom(o) != atom) continue;
      if ((cl.op(o) == ltl::Op::Not) != negative) return true;
    }
    return false;
  };
  auto add_pending = [](TableauNode& n, int f) {
    if (!n.old.contains(f)) n.pending.insert(f);
  };

  while (!stack.empty()) {
    TableauNode node = std::move(stack.back());
    stack.pop_back();
    if (node.pending.empty()) {
      auto key = std::make_pair(node.old, node.next);
      if (auto it = finished.find(key); it != finished.end()) {
        out.incoming[it->second].insert(node.incoming.begin(), node.incoming.end());
        continue;
      }
      std::size_t idx = out.old.size();
      finished.emplace(key, idx);
      out.old.push_back(node.old);
      out.incoming.push_back(node.incoming);
      stack.push_back({{static_cast<int>(idx)}, node.next, {}, {}});
      continue;
    }
    int eta = *node.pending.begin();
    node.pending.erase(node.pending.begin());
    if (node.old.contains(eta)) {
      stack.push_back(std::move(node));
      continue;
    }
    switch (cl.op(eta)) {
      case ltl::Op::False: break;
      case ltl::Op::True:
        node.old.insert(eta);
        stack.push_back(std::move(node));
        break;
      case ltl::Op::Atom:
      case ltl::Op::Not:
        if (has_complement(node.old, eta)) break;
        node.old.insert(eta);
        stack.push_back(std::move(node));
        break;
      case ltl::Op::And:
        node.old.insert(eta);
        add_pending(node, cl.lhs(eta));
        add_pending(node, cl.rhs(eta));
        stack.push_back(std::move(node));
        break;
      case ltl::Op::Next:
        node.old.insert(eta);
        node.next.insert(cl.lhs(eta));
        stack.push_back(std::move(node));
        break;
      case ltl::Op::Or:
      case ltl::Op::Until:
      case ltl::Op::Release: {
        const int mu = cl.lhs(eta);
        const int psi = cl.rhs(eta);
        TableauNode first = node;
        TableauNode second = std::move(node);
        first.old.insert(eta);
        second.old.insert(eta);
        if (cl.op(eta) == ltl::Op::Or) {
          add_pending(first, mu);
          add_pending(second, psi);
        } else if (cl.op(eta) == ltl::Op::Until) {
          add_pending(first, mu);
          first.next.insert(eta);
          add_pending(second, psi);
        } else {
          add_pending(first, psi);
          first.next.insert(eta);
          add_pending(second, mu);
          add_pending(second, psi);
        }
        // Second is pushed first so the first branch expands first.
        stack.push_back(std::move(second));
        stack.push_back(std::move(first));
        break;
      }
      default: throw InputError("formula is not in negation normal form");
    }
  }
  return out;
}

// Strongly connected components (iterative Tarjan). Returns the component
// id of every vertex; ids are in reverse topological order.
inline std::vector<std::size_t> scc_ids(const std::vector<std::vector<std::size_t>>& graph,
                                        std::size_t* component_count = nullptr) {
  const std::size_t n = graph.size();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0;
  std::size_t comps = 0;
  std::vector<std::pair<std::size_t, std::size_t>> call;
  for (std::size_t s = 0; s < n; ++s) {
    if (index[s] != kUnset) continue;
    call.emplace_back(s, 0);
    while (!call.empty()) {
      auto& [v, i] = call.back();
      if (i == 0 && index[v] == kUnset) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      if (i < graph[v].size()) {
        std::size_t w = graph[v][i++];
        if (index[w] == kUnset) {
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = comps;
        } while (w != v);
        ++comps;
      }
      std::size_t done = v;
      call.pop_back();
      if (!call.empty()) {
        std::size_t parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
    }
  }
  if (component_count) *component_count = comps;
  return comp;
}

// Drops states that are unreachable or cannot reach an accepting cycle,
// then merges states with identical acceptance and outgoing edges until
// nothing changes. Language is preserved.
inline BuchiAutomaton trim(BuchiAutomaton n) {
  const std::size_t count = n.state_count();
  std::vector<std::vector<std::size_t>> graph(count);
  for (std::size_t q = 0; q < count; ++q) {
    for (const auto& e : n.edges[q]) graph[q].push_back(e.target);
  }
  std::size_t comps = 0;
  auto comp = scc_ids(graph, &comps);
  std::vector<bool> good_comp(comps, false);
  for (std::size_t q = 0; q < count; ++q) {
    if (!n.accepting[q]) continue;
    for (auto t : graph[q]) {
      if (comp[t] == comp[q]) good_comp[comp[q]] = true;
    }
  }
  // Components come out in reverse topological order, so successors are
  // decided before their predecessors.
  std::vector<std::vector<std::size_t>> members(comps);
  for (std::size_t q = 0; q < count; ++q) members[comp[q]].push_back(q);
  std::vector<bool> productive(count, false);
  for (std::size_t c = 0; c < comps; ++c) {
    bool ok = good_comp[c];
    for (auto q : members[c]) {
      for (auto t : graph[q]) ok = ok || productive[t];
    }
    for (auto q : members[c]) productive[q] = ok;
  }
  std::vector<bool> reachable(count, false);
  std::vector<std::size_t> work;
  for (auto q : n.initial) {
    if (productive[q] && !reachable[q]) {
      reachable[q] = true;
      work.push_back(q);
    }
  }
  while (!work.empty()) {
    auto q = work.back();
    work.pop_back();
    for (auto t : graph[q]) {
      if (productive[t] && !reachable[t]) {
        reachable[t] = true;
        work.push_back(t);
      }
    }
  }

  // Representative of each state, refined until stable.
  std::vector<std::size_t> rep(count);
  for (std::size_t q = 0; q < count; ++q) rep[q] = q;
  for (bool changed = true; changed;) {
    changed = false;
    std::map<std::pair<bool, std::vector<BuchiEdge>>, std::size_t> seen;
    std::vector<std::size_t> next_rep(count);
    for (std::size_t q = 0; q < count; ++q) {
      if (!reachable[q]) continue;
      std::vector<BuchiEdge> sig;
      for (const auto& e : n.edges[q]) {
        if (reachable[e.target]) sig.push_back({e.positive, e.negative, rep[e.target]});
      }
      std::sort(sig.begin(), sig.end());
      sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
      auto [it, inserted] = seen.emplace(std::make_pair(n.accepting[q], std::move(sig)), q);
      next_rep[q] = it->second;
    }
    for (std::size_t q = 0; q < count; ++q) {
      if (reachable[q] && next_rep[q] != rep[q]) {
        changed = true;
      }
    }
    for (std::size_t q = 0; q < count; ++q) {
      if (reachable[q]) rep[q] = next_rep[q];
    }
  }

  std::vector<std::size_t> renumber(count, static_cast<std::size_t>(-1));
  BuchiAutomaton out;
  out.propositions = n.propositions;
  for (std::size_t q = 0; q < count; ++q) {
    if (reachable[q] && rep[q] == q) {
      renumber[q] = out.edges.size();
      out.edges.emplace_back();
      out.accepting.push_back(n.accepting[q]);
    }
  }
  for (std::size_t q = 0; q < count; ++q) {
    if (!reachable[q] || rep[q] != q) continue;
    auto& dst = out.edges[renumber[q]];
    for (const auto& e : n.edges[q]) {
      if (reachable[e.target]) dst.push_back({e.positive, e.negative, renumber[rep[e.target]]});
    }
    std::sort(dst.begin(), dst.end());
    dst.erase(std::unique(dst.begin(), dst.end()), dst.end());
  }
  for (auto q : n.initial) {
    if (reachable[q]) out.initial.push_back(renumber[rep[q]]);
  }
  std::sort(out.initial.begin(), out.initial.end());
  out.initial.erase(std::unique(out.initial.begin(), out.initial.end()), out.initial.end());
  if (out.edges.empty()) {
    // Empty language: one non-accepting state without edges.
    out.edges.emplace_back();
    out.accepting.push_back(false);
    out.initial = {0};
  }
  return out;
}

}  // namespace detail

/// Translates an NNF formula into a Buchi automaton: tableau expansion into
/// a generalized Buchi automaton with one acceptance set per until
/// subformula, then counter-based degeneralization and trimming.
///
/// A tableau node's literals constrain the letter read while the run is in
/// that node, so no extra initial state is needed.
inline BuchiAutomaton ltl_to_nba(const ltl::Formula& f) {
  if (!ltl::is_nnf(f)) throw InputError("ltl_to_nba expects a formula in negation normal form");
  detail::Closure cl;
  const int root = cl.intern(f);
  auto tableau = detail::expand_tableau(cl, root);

  BuchiAutomaton gba;
  gba.propositions = ltl::atoms(f);
  const std::size_t nodes = tableau.old.size();
  auto prop_index = [&](const std::string& atom) {
    auto it = std::find(gba.propositions.begin(), gba.propositions.end(), atom);
    return static_cast<PropIndex>(it - gba.propositions.begin());
  };

  std::vector<PropSet> pos(nodes), neg(nodes);
  for (std::size_t q = 0; q < nodes; ++q) {
    for (int o : tableau.old[q]) {
      if (cl.op(o) == ltl::Op::Atom) pos[q].insert(prop_index(cl.name(o)));
      if (cl.op(o) == ltl::Op::Not) neg[q].insert(prop_index(cl.name(cl.lhs(o))));
    }
  }
  std::vector<std::vector<std::size_t>> succ(nodes);
  std::vector<StateIndex> initial_nodes;
  for (std::size_t q = 0; q < nodes; ++q) {
    for (int from : tableau.incoming[q]) {
      if (from == detail::kInit) {
        initial_nodes.push_back(q);
      } else {
        succ[static_cast<std::size_t>(from)].push_back(q);
      }
    }
  }

  // Acceptance set for each until subformula a U b: nodes that either
  // fulfil b or do not owe a U b.
  std::vector<std::vector<bool>> sets;
  for (std::size_t id = 0; id < cl.size(); ++id) {
    if (cl.op(static_cast<int>(id)) != ltl::Op::Until) continue;
    std::vector<bool> in(nodes);
    const int b = cl.rhs(static_cast<int>(id));
    for (std::size_t q = 0; q < nodes; ++q) {
      in[q] = tableau.old[q].contains(b) || !tableau.old[q].contains(static_cast<int>(id));
    }
    sets.push_back(std::move(in));
  }

  BuchiAutomaton nba;
  nba.propositions = gba.propositions;
  const std::size_t k = std::max<std::size_t>(sets.size(), 1);
  std::map<std::pair<std::size_t, std::size_t>, StateIndex> ids;
  std::deque<std::pair<std::size_t, std::size_t>> work;
  auto id_of = [&](std::size_t q, std::size_t level) {
    auto [it, inserted] = ids.emplace(std::make_pair(q, level), nba.edges.size());
    if (inserted) {
      nba.edges.emplace_back();
      nba.accepting.push_back(sets.empty() || (level == 0 && sets[0][q]));
      work.emplace_back(q, level);
    }
    return it->second;
  };
  for (auto q : initial_nodes) nba.initial.push_back(id_of(q, 0));
  while (!work.empty()) {
    auto [q, level] = work.front();
    work.pop_front();
    StateIndex from = ids.at({q, level});
    std::size_t next_level = (!sets.empty() && sets[level][q]) ? (level + 1) % k : level;
    for (auto t : succ[q]) {
      StateIndex to = id_of(t, next_level);
      nba.edges[from].push_back({pos[q], neg[q], to});
    }
  }
  return detail::trim(std::move(nba));
}

namespace detail {

// Fixed-width bit set over Buchi states.
class StateBits {
 public:
  StateBits() = default;
  explicit StateBits(std::size_t n) : words_((n + 63) / 64, 0) {}

  void set(std::size_t i) { words_[i / 64] |= (std::uint64_t{1} << (i % 64)); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  bool none() const {
    for (auto w : words_) {
      if (w) return false;
    }
    return true;
  }
  StateBits& operator|=(const StateBits& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  StateBits operator&(const StateBits& o) const {
    StateBits r = *this;
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] &= o.words_[i];
    return r;
  }
  StateBits& subtract(const StateBits& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    return *this;
  }
  const std::vector<std::uint64_t>& words() const { return words_; }
  bool operator==(const StateBits&) const = default;

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      for (std::uint64_t b = words_[i]; b != 0; b &= b - 1) f(i * 64 + static_cast<std::size_t>(std::countr_zero(b)));
    }
  }

 private:
  std::vector<std::uint64_t> words_;
};

struct SafraNode {
  std::size_t name = 0;
  bool marked = false;
  StateBits label;
  std::vector<SafraNode> children;  // oldest first
};

inline void serialize_tree(const SafraNode& n, std::vector<std::uint64_t>& out) {
  out.push_back((static_cast<std::uint64_t>(n.name) << 1) | (n.marked ? 1U : 0U));
  out.push_back(n.children.size());
  out.insert(out.end(), n.label.words().begin(), n.label.words().end());
  for (const auto& c : n.children) serialize_tree(c, out);
}

struct TreeKeyHash {
  std::size_t operator()(const std::vector<std::uint64_t>& key) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto w : key) {
      h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

class SafraStep {
 public:
  SafraStep(const BuchiAutomaton& nba, const std::vector<PropSet>& alphabet)
      : n_(nba.state_count()), accepting_(n_), post_(n_) {
    for (std::size_t q = 0; q < n_; ++q) {
      if (nba.accepting[q]) accepting_.set(q);
      post_[q].reserve(alphabet.size());
      for (auto sym : alphabet) {
        StateBits bits(n_);
        for (auto t : nba.successors(q, sym)) bits.set(t);
        post_[q].push_back(std::move(bits));
      }
    }
  }

  std::size_t buchi_states() const noexcept { return n_; }

  std::optional<SafraNode> operator()(const SafraNode& tree, std::size_t symbol) const {
    SafraNode t = tree;
    std::vector<bool> used(2 * n_ + 2, false);
    unmark_and_collect(t, used);
    spawn(t, used);
    update(t, symbol);
    StateBits blocked(n_);
    horizontal(t, blocked);
    if (t.label.none()) return std::nullopt;
    prune_empty(t);
    vertical(t);
    return t;
  }

 private:
  static void unmark_and_collect(SafraNode& n, std::vector<bool>& used) {
    n.marked = false;
    used[n.name] = true;
    for (auto& c : n.children) unmark_and_collect(c, used);
  }

  void spawn(SafraNode& n, std::vector<bool>& used) const {
    const std::size_t original = n.children.size();
    for (std::size_t i = 0; i < original; ++i) spawn(n.children[i], used);
    StateBits fin = n.label & accepting_;
    if (fin.none()) return;
    std::size_t name = 1;
    while (used[name]) ++name;
    used[name] = true;
    n.children.push_back({name, false, std::move(fin), {}});
  }

  void update(SafraNode& n, std::size_t symbol) const {
    StateBits next(n_);
    n.label.for_each([&](std::size_t q) { next |= post_[q][symbol]; });
    n.label = std::move(next);
    for (auto& c : n.children) update(c, symbol);
  }

  // A state stays only in the oldest branch that holds it.
  static void horizontal(SafraNode& n, const StateBits& blocked) {
    n.label.subtract(blocked);
    StateBits seen = blocked;
    for (auto& c : n.children) {
      horizontal(c, seen);
      seen |= c.label;
    }
  }

  static void prune_empty(SafraNode& n) {
    std::erase_if(n.children, [](const SafraNode& c) { return c.label.none(); });
    for (auto& c : n.children) prune_empty(c);
  }

  void vertical(SafraNode& n) const {
    if (n.children.empty()) return;
    StateBits all(n_);
    for (const auto& c : n.children) all |= c.label;
    if (all == n.label) {
      n.children.clear();
      n.marked = true;
      return;
    }
    for (auto& c : n.children) vertical(c);
  }

  std::size_t n_;
  StateBits accepting_;
  std::vector<std::vector<StateBits>> post_;  // [state][symbol]
};

inline void collect_names(const SafraNode& n, std::vector<std::pair<std::size_t, bool>>& out) {
  out.emplace_back(n.name, n.marked);
  for (const auto& c : n.children) collect_names(c, out);
}

}  // namespace detail

struct DeterminizeOptions {
  /// Input symbols to determinize over; the full 2^AP when empty.
  std::vector<PropSet> alphabet;
  std::size_t state_cap = kDefaultDraStateCap;
};

/// Safra's construction. Node names are the smallest unused positive
/// integers, children are kept oldest first, and trees compare structurally
/// (names included), so the state space is deterministic. Name i yields the
/// pair (trees without i, trees where i is marked); pairs whose second
/// component is empty are dropped.
inline RabinAutomaton nba_to_dra(const BuchiAutomaton& nba, const DeterminizeOptions& options = {}) {
  RabinAutomaton dra;
  dra.propositions = nba.propositions;
  dra.alphabet = options.alphabet.empty() ? full_alphabet(nba.propositions.size()) : options.alphabet;
  std::sort(dra.alphabet.begin(), dra.alphabet.end());
  dra.alphabet.erase(std::unique(dra.alphabet.begin(), dra.alphabet.end()), dra.alphabet.end());

  const detail::SafraStep step(nba, dra.alphabet);
  std::vector<std::optional<detail::SafraNode>> trees;
  std::unordered_map<std::vector<std::uint64_t>, StateIndex, detail::TreeKeyHash> ids;

  auto intern = [&](std::optional<detail::SafraNode> tree) -> StateIndex {
    std::vector<std::uint64_t> key;
    if (tree) detail::serialize_tree(*tree, key);
    auto [it, inserted] = ids.emplace(std::move(key), trees.size());
    if (inserted) {
      if (trees.size() >= options.state_cap) {
        throw CapacityError("Rabin automaton exceeds the state cap of " + std::to_string(options.state_cap));
      }
      trees.push_back(std::move(tree));
    }
    return it->second;
  };

  detail::SafraNode root{1, false, detail::StateBits(nba.state_count()), {}};
  for (auto q : nba.initial) root.label.set(q);
  dra.initial = root.label.none() ? intern(std::nullopt) : intern(std::move(root));

  for (std::size_t i = 0; i < trees.size(); ++i) {
    std::vector<StateIndex> row(dra.alphabet.size());
    for (std::size_t k = 0; k < dra.alphabet.size(); ++k) {
      if (!trees[i]) {
        row[k] = i;
        continue;
      }
      row[k] = intern(step(*trees[i], k));
    }
    dra.delta.push_back(std::move(row));
  }

  const std::size_t max_name = 2 * nba.state_count() + 1;
  std::vector<RabinPair> by_name(max_name + 1);
  std::vector<std::vector<bool>> present(max_name + 1, std::vector<bool>(trees.size(), false));
  for (StateIndex q = 0; q < trees.size(); ++q) {
    if (!trees[q]) continue;
    std::vector<std::pair<std::size_t, bool>> names;
    detail::collect_names(*trees[q], names);
    for (auto [name, marked] : names) {
      present[name][q] = true;
      if (marked) by_name[name].inf.push_back(q);
    }
  }
  for (std::size_t name = 1; name <= max_name; ++name) {
    if (by_name[name].inf.empty()) continue;
    for (StateIndex q = 0; q < trees.size(); ++q) {
      if (!present[name][q]) by_name[name].fin.push_back(q);
    }
    dra.pairs.push_back(std::move(by_name[name]));
  }
  return dra;
}

struct TranslateOptions {
  /// Determinize over these symbols only (names refer to the formula's
  /// atoms in first-occurrence order). Full alphabet when empty.
  std::vector<PropSet> alphabet;
  std::size_t state_cap = kDefaultDraStateCap;
};

/// Full translation: NNF, tableau, degeneralization, Safra.
inline RabinAutomaton ltl_to_dra(const ltl::Formula& f, const TranslateOptions& options = {}) {
  return nba_to_dra(ltl_to_nba(ltl::to_nnf(f)), {options.alphabet, options.state_cap});
}

/// Runs the unique run of `d` on prefix . cycle^omega and applies the Rabin
/// condition to the states visited infinitely often.
inline bool dra_accepts_lasso(const RabinAutomaton& d, const ltl::LassoWord& w) {
  if (w.cycle.empty()) throw InputError("lasso cycle must be nonempty");
  StateIndex q = d.initial;
  for (auto sym : w.prefix) q = d.step(q, sym);
  // State at the start of each cycle iteration; the run is periodic once
  // one repeats.
  std::vector<StateIndex> starts;
  std::unordered_map<StateIndex, std::size_t> first_seen;
  while (!first_seen.contains(q)) {
    first_seen.emplace(q, starts.size());
    starts.push_back(q);
    for (auto sym : w.cycle) q = d.step(q, sym);
  }
  std::vector<bool> recurring(d.state_count(), false);
  StateIndex r = q;
  for (std::size_t it = first_seen.at(q); it < starts.size(); ++it) {
    for (auto sym : w.cycle) {
      recurring[r] = true;
      r = d.step(r, sym);
    }
  }
  for (const auto& pair : d.pairs) {
    bool hits_fin = std::any_of(pair.fin.begin(), pair.fin.end(), [&](StateIndex s) { return recurring[s]; });
    bool hits_inf = std::any_of(pair.inf.begin(), pair.inf.end(), [&](StateIndex s) { return recurring[s]; });
    if (!hits_fin && hits_inf) return true;
  }
  return false;
}

/// Removes transitions on symbols outside `realizable`, then states no
/// longer reachable from the initial state. Survivors are renumbered in
/// breadth-first order; pairs keep only surviving states.
inline RabinAutomaton restrict_alphabet(const RabinAutomaton& d, const std::vector<PropSet>& realizable) {
  std::vector<std::size_t> keep;  // positions in d.alphabet
  RabinAutomaton out;
  out.propositions = d.propositions;
  for (std::size_t k = 0; k < d.alphabet.size(); ++k) {
    if (std::find(realizable.begin(), realizable.end(), d.alphabet[k]) != realizable.end()) {
      keep.push_back(k);
      out.alphabet.push_back(d.alphabet[k]);
    }
  }
  if (keep.empty()) throw InputError("no realizable symbol is in the automaton alphabet");

  constexpr StateIndex kGone = static_cast<StateIndex>(-1);
  std::vector<StateIndex> renumber(d.state_count(), kGone);
  std::vector<StateIndex> order{d.initial};
  renumber[d.initial] = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (auto k : keep) {
      StateIndex t = d.delta[order[i]][k];
      if (renumber[t] == kGone) {
        renumber[t] = order.size();
        order.push_back(t);
      }
    }
  }
  for (auto q : order) {
    std::vector<StateIndex> row;
    for (auto k : keep) row.push_back(renumber[d.delta[q][k]]);
    out.delta.push_back(std::move(row));
  }
  out.initial = 0;
  for (const auto& pair : d.pairs) {
    RabinPair p;
    for (auto q : pair.fin) {
      if (renumber[q] != kGone) p.fin.push_back(renumber[q]);
    }
    for (auto q : pair.inf) {
      if (renumber[q] != kGone) p.inf.push_back(renumber[q]);
    }
    std::sort(p.fin.begin(), p.fin.end());
    std::sort(p.inf.begin(), p.inf.end());
    out.pairs.push_back(std::move(p));
  }
  return out;
}

}  // namespace ltlmdp
