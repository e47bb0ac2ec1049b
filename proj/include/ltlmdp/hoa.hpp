#pragma once

// Reading and writing deterministic Rabin automata in the Hanoi
// Omega-Automata (HOA v1) text format. Only the fragment needed for DRA
// exchange is supported: a single start state, explicit edge labels,
// state-based Rabin acceptance.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ltlmdp/automata.hpp"
#include "ltlmdp/error.hpp"

namespace ltlmdp {

namespace detail::hoa {

inline std::string cube(PropSet symbol, std::size_t ap_count) {
  if (ap_count == 0) return "t";
  std::string out;
  for (std::size_t i = 0; i < ap_count; ++i) {
    if (i) out += '&';
    if (!symbol.contains(i)) out += '!';
    out += std::to_string(i);
  }
  return out;
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

enum class Kind { Header, Ident, String, Int, Punct, Body, End, Abort, Eof };

struct Token {
  Kind kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

inline std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    const std::size_t l = line, cl = col;
    if (s.substr(i, 2) == "/*") {
      auto end = s.find("*/", i + 2);
      if (end == std::string_view::npos) throw ParseError("unterminated comment", l, cl);
      advance(end + 2 - i);
      continue;
    }
    if (c == '"') {
      std::string text;
      advance(1);
      while (i < s.size() && s[i] != '"') {
        if (s[i] == '\\' && i + 1 < s.size()) advance(1);
        text += s[i];
        advance(1);
      }
      if (i >= s.size()) throw ParseError("unterminated string", l, cl);
      advance(1);
      out.push_back({Kind::String, std::move(text), l, cl});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Kind::Int, std::string(s.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '-')) ++j;
      std::string word(s.substr(i, j - i));
      if (j < s.size() && s[j] == ':') {
        out.push_back({Kind::Header, word + ":", l, cl});
        advance(j + 1 - i);
      } else {
        out.push_back({Kind::Ident, word, l, cl});
        advance(j - i);
      }
      continue;
    }
    if (s.substr(i, 8) == "--BODY--") {
      out.push_back({Kind::Body, "--BODY--", l, cl});
      advance(8);
      continue;
    }
    if (s.substr(i, 7) == "--END--") {
      out.push_back({Kind::End, "--END--", l, cl});
      advance(7);
      continue;
    }
    if (s.substr(i, 9) == "--ABORT--") {
      out.push_back({Kind::Abort, "--ABORT--", l, cl});
      advance(9);
      continue;
    }
    if (std::string_view("[]{}()&|!@").find(c) != std::string_view::npos) {
      out.push_back({Kind::Punct, std::string(1, c), l, cl});
      advance(1);
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
  }
  out.push_back({Kind::Eof, "", line, col});
  return out;
}

// Boolean expression over AP indices (edge labels) or acceptance atoms.
struct Expr {
  enum class Op { True, False, Var, Not, And, Or, Fin, Inf } op;
  std::size_t index = 0;
  std::vector<Expr> args;

  bool eval(PropSet symbol) const {
    switch (op) {
      case Op::True: return true;
      case Op::False: return false;
      case Op::Var: return symbol.contains(index);
      case Op::Not: return !args[0].eval(symbol);
      case Op::And: return std::all_of(args.begin(), args.end(), [&](const Expr& e) { return e.eval(symbol); });
      case Op::Or: return std::any_of(args.begin(), args.end(), [&](const Expr& e) { return e.eval(symbol); });
      default: return false;
    }
  }
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : t_(std::move(tokens)) {}

  RabinAutomaton parse() {
    header();
    body();
    return build();
  }

 private:
  const Token& peek() const { return t_[pos_]; }
  const Token& take() { return t_[pos_ == t_.size() - 1 ? pos_ : pos_++]; }

  [[noreturn]] void fail(const std::string& what, const Token& at) const {
    throw ParseError(what, at.line, at.column);
  }

  bool is_punct(const char* p) const { return peek().kind == Kind::Punct && peek().text == p; }

  void expect_punct(const char* p) {
    if (!is_punct(p)) fail(std::string("expected '") + p + "'", peek());
    take();
  }

  std::size_t integer() {
    if (peek().kind != Kind::Int) fail("expected an integer", peek());
    const auto& tok = take();
    try {
      return static_cast<std::size_t>(std::stoull(tok.text));
    } catch (const std::exception&) {
      fail("integer out of range", tok);
    }
  }

  void header() {
    if (peek().kind != Kind::Header || peek().text != "HOA:") fail("document must start with 'HOA:'", peek());
    take();
    if (peek().kind != Kind::Ident || peek().text != "v1") fail("only HOA version v1 is supported", peek());
    take();
    bool has_start = false;
    while (peek().kind == Kind::Header) {
      const Token h = take();
      if (h.text == "States:") {
        states_ = integer();
      } else if (h.text == "Start:") {
        if (has_start) throw UnsupportedError("Start: more than one initial state is not supported");
        has_start = true;
        start_ = integer();
        if (is_punct("&")) throw UnsupportedError("Start: alternating initial states are not supported");
      } else if (h.text == "AP:") {
        std::size_t n = integer();
        for (std::size_t i = 0; i < n; ++i) {
          if (peek().kind != Kind::String) fail("expected an atomic proposition name", peek());
          aps_.push_back(take().text);
        }
        if (aps_.size() > kMaxFullAlphabetPropositions) {
          throw CapacityError("AP: " + std::to_string(aps_.size()) + " propositions is too many");
        }
      } else if (h.text == "acc-name:") {
        if (peek().kind != Kind::Ident) fail("expected an acceptance name", peek());
        std::string name = take().text;
        std::string full = "acc-name: " + name;
        while (peek().kind == Kind::Int || peek().kind == Kind::Ident) full += " " + take().text;
        if (name != "Rabin") throw UnsupportedError(full + " is not supported; expected Rabin acceptance");
        acc_name_ = full;
        std::istringstream in(full.substr(std::string("acc-name: Rabin").size()));
        std::size_t k;
        if (!(in >> k)) fail("acc-name: Rabin needs a pair count", h);
        rabin_pairs_ = k;
      } else if (h.text == "Acceptance:") {
        acc_sets_ = integer();
        acceptance_ = acceptance_or();
        acceptance_line_ = h;
      } else if (h.text == "Alias:") {
        throw UnsupportedError("Alias: label aliases are not supported");
      } else {
        // name:, tool:, properties: and unknown headers carry nothing we use.
        while (peek().kind != Kind::Header && peek().kind != Kind::Body && peek().kind != Kind::Eof) take();
      }
    }
    if (peek().kind != Kind::Body) fail("expected '--BODY--'", peek());
    take();
    if (!states_) throw UnsupportedError("States: header is required");
    if (!has_start) throw UnsupportedError("Start: header is required");
    if (!rabin_pairs_) throw UnsupportedError("acc-name: header is required and must be Rabin");
    if (!acceptance_) throw UnsupportedError("Acceptance: header is required");
    if (*start_ >= *states_) fail("Start: state out of range", acceptance_line_);
  }

  Expr acceptance_or() {
    Expr e{Expr::Op::Or, 0, {acceptance_and()}};
    while (is_punct("|")) {
      take();
      e.args.push_back(acceptance_and());
    }
    return e.args.size() == 1 ? std::move(e.args[0]) : e;
  }

  Expr acceptance_and() {
    Expr e{Expr::Op::And, 0, {acceptance_atom()}};
    while (is_punct("&")) {
      take();
      e.args.push_back(acceptance_atom());
    }
    return e.args.size() == 1 ? std::move(e.args[0]) : e;
  }

  Expr acceptance_atom() {
    if (is_punct("(")) {
      take();
      Expr e = acceptance_or();
      expect_punct(")");
      return e;
    }
    if (peek().kind == Kind::Ident && (peek().text == "t" || peek().text == "f")) {
      return {take().text == "t" ? Expr::Op::True : Expr::Op::False, 0, {}};
    }
    if (peek().kind == Kind::Ident && (peek().text == "Fin" || peek().text == "Inf")) {
      auto op = take().text == "Fin" ? Expr::Op::Fin : Expr::Op::Inf;
      expect_punct("(");
      if (is_punct("!")) throw UnsupportedError("Acceptance: complemented sets are not supported");
      std::size_t set = integer();
      expect_punct(")");
      return {op, set, {}};
    }
    fail("malformed acceptance condition", peek());
  }

  Expr label_or() {
    Expr e{Expr::Op::Or, 0, {label_and()}};
    while (is_punct("|")) {
      take();
      e.args.push_back(label_and());
    }
    return e.args.size() == 1 ? std::move(e.args[0]) : e;
  }

  Expr label_and() {
    Expr e{Expr::Op::And, 0, {label_not()}};
    while (is_punct("&")) {
      take();
      e.args.push_back(label_not());
    }
    return e.args.size() == 1 ? std::move(e.args[0]) : e;
  }

  Expr label_not() {
    if (is_punct("!")) {
      take();
      return {Expr::Op::Not, 0, {label_not()}};
    }
    if (is_punct("(")) {
      take();
      Expr e = label_or();
      expect_punct(")");
      return e;
    }
    if (is_punct("@")) throw UnsupportedError("Alias: label aliases are not supported");
    if (peek().kind == Kind::Ident && (peek().text == "t" || peek().text == "f")) {
      return {take().text == "t" ? Expr::Op::True : Expr::Op::False, 0, {}};
    }
    const Token& at = peek();
    std::size_t ap = integer();
    if (ap >= aps_.size()) fail("label refers to undeclared proposition " + std::to_string(ap), at);
    return {Expr::Op::Var, ap, {}};
  }

  std::vector<std::size_t> set_list() {
    std::vector<std::size_t> out;
    expect_punct("{");
    while (!is_punct("}")) {
      const Token& at = peek();
      std::size_t k = integer();
      if (k >= acc_sets_) fail("acceptance set " + std::to_string(k) + " is not declared", at);
      out.push_back(k);
    }
    take();
    return out;
  }

  void body() {
    state_sets_.assign(*states_, {});
    edges_.assign(*states_, {});
    std::vector<bool> seen(*states_, false);
    while (peek().kind == Kind::Header && peek().text == "State:") {
      take();
      if (is_punct("[")) throw UnsupportedError("State: state labels are not supported");
      const Token& at = peek();
      std::size_t q = integer();
      if (q >= *states_) fail("state " + std::to_string(q) + " is out of range", at);
      if (seen[q]) fail("state " + std::to_string(q) + " is declared twice", at);
      seen[q] = true;
      if (peek().kind == Kind::String) take();
      if (is_punct("{")) state_sets_[q] = set_list();
      while (is_punct("[") || peek().kind == Kind::Int) {
        if (!is_punct("[")) throw UnsupportedError("properties: implicit-labels are not supported");
        take();
        Expr label = label_or();
        expect_punct("]");
        const Token& tt = peek();
        std::size_t target = integer();
        if (target >= *states_) fail("edge to undeclared state " + std::to_string(target), tt);
        if (is_punct("&")) throw UnsupportedError("properties: univ-branch (alternation) is not supported");
        if (is_punct("{")) throw UnsupportedError("Acceptance: transition-based acceptance is not supported");
        edges_[q].push_back({std::move(label), target});
      }
    }
    if (peek().kind == Kind::Abort) fail("document was aborted", peek());
    if (peek().kind != Kind::End) fail("expected 'State:' or '--END--'", peek());
  }

  std::vector<RabinPair> pairs() const {
    const Expr& acc = *acceptance_;
    std::vector<const Expr*> disjuncts;
    if (acc.op == Expr::Op::False) {
      // Rabin 0: nothing is accepted.
    } else if (acc.op == Expr::Op::Or) {
      for (const auto& d : acc.args) disjuncts.push_back(&d);
    } else {
      disjuncts.push_back(&acc);
    }
    auto reject = [&]() {
      throw UnsupportedError("Acceptance: condition is not of the form (Fin(i)&Inf(j))|...; " + acc_name_);
    };
    std::vector<std::pair<std::size_t, std::size_t>> sets;
    for (const Expr* d : disjuncts) {
      if (d->op != Expr::Op::And || d->args.size() != 2) reject();
      const Expr* fin = &d->args[0];
      const Expr* inf = &d->args[1];
      if (fin->op == Expr::Op::Inf) std::swap(fin, inf);
      if (fin->op != Expr::Op::Fin || inf->op != Expr::Op::Inf) reject();
      sets.emplace_back(fin->index, inf->index);
    }
    if (sets.size() != *rabin_pairs_) {
      throw UnsupportedError(acc_name_ + " does not match the " + std::to_string(sets.size()) +
                             " pairs of the Acceptance: condition");
    }
    std::vector<RabinPair> out;
    for (auto [f, i] : sets) {
      RabinPair p;
      for (StateIndex q = 0; q < *states_; ++q) {
        const auto& s = state_sets_[q];
        if (std::find(s.begin(), s.end(), f) != s.end()) p.fin.push_back(q);
        if (std::find(s.begin(), s.end(), i) != s.end()) p.inf.push_back(q);
      }
      out.push_back(std::move(p));
    }
    return out;
  }

  RabinAutomaton build() const {
    RabinAutomaton d;
    d.propositions = aps_;
    d.initial = *start_;
    const auto symbols = full_alphabet(aps_.size());
    std::vector<std::vector<std::optional<StateIndex>>> table(*states_);
    std::optional<std::vector<bool>> coverage;
    for (StateIndex q = 0; q < *states_; ++q) {
      table[q].assign(symbols.size(), std::nullopt);
      std::vector<bool> covered(symbols.size(), false);
      for (const auto& [label, target] : edges_[q]) {
        for (std::size_t k = 0; k < symbols.size(); ++k) {
          if (!label.eval(symbols[k])) continue;
          if (table[q][k] && *table[q][k] != target) {
            throw UnsupportedError("properties: state " + std::to_string(q) +
                                   " is nondeterministic; a deterministic automaton is required");
          }
          table[q][k] = target;
          covered[k] = true;
        }
      }
      if (coverage && *coverage != covered) {
        throw UnsupportedError("properties: state " + std::to_string(q) +
                               " has an incomplete transition function; a complete automaton is required");
      }
      coverage = std::move(covered);
    }
    for (std::size_t k = 0; k < symbols.size(); ++k) {
      if ((*coverage)[k]) d.alphabet.push_back(symbols[k]);
    }
    if (d.alphabet.empty()) {
      throw UnsupportedError("properties: automaton has no transitions; a complete automaton is required");
    }
    for (StateIndex q = 0; q < *states_; ++q) {
      std::vector<StateIndex> row;
      for (std::size_t k = 0; k < symbols.size(); ++k) {
        if ((*coverage)[k]) row.push_back(*table[q][k]);
      }
      d.delta.push_back(std::move(row));
    }
    d.pairs = pairs();
    return d;
  }

  std::vector<Token> t_;
  std::size_t pos_ = 0;
  std::optional<std::size_t> states_;
  std::optional<std::size_t> start_;
  std::vector<std::string> aps_;
  std::optional<std::size_t> rabin_pairs_;
  std::string acc_name_;
  std::size_t acc_sets_ = 0;
  std::optional<Expr> acceptance_;
  Token acceptance_line_{Kind::Eof, "", 0, 0};
  std::vector<std::vector<std::size_t>> state_sets_;
  std::vector<std::vector<std::pair<Expr, StateIndex>>> edges_;
};

}  // namespace detail::hoa

/// HOA v1 text for `d`. Each state gets one edge per successor whose label
/// is the disjunction of the symbols leading there. Pair i uses acceptance
/// sets 2i (Fin) and 2i+1 (Inf).
inline std::string export_hoa(const RabinAutomaton& d) {
  check_well_formed(d);
  const std::size_t ap_count = d.propositions.size();
  const std::size_t k = d.pairs.size();
  std::ostringstream out;
  out << "HOA: v1\n";
  out << "States: " << d.state_count() << "\n";
  out << "Start: " << d.initial << "\n";
  out << "AP: " << ap_count;
  for (const auto& ap : d.propositions) out << ' ' << detail::hoa::quote(ap);
  out << "\n";
  out << "acc-name: Rabin " << k << "\n";
  out << "Acceptance: " << 2 * k << ' ';
  if (k == 0) out << 'f';
  for (std::size_t i = 0; i < k; ++i) {
    out << (i ? "|" : "") << "(Fin(" << 2 * i << ")&Inf(" << 2 * i + 1 << "))";
  }
  out << "\n";
  out << "properties: trans-labels explicit-labels state-acc deterministic";
  if (d.alphabet.size() == (std::size_t{1} << ap_count)) out << " complete";
  out << "\n--BODY--\n";
  for (StateIndex q = 0; q < d.state_count(); ++q) {
    out << "State: " << q;
    std::vector<std::size_t> sets;
    for (std::size_t i = 0; i < k; ++i) {
      if (std::binary_search(d.pairs[i].fin.begin(), d.pairs[i].fin.end(), q)) sets.push_back(2 * i);
      if (std::binary_search(d.pairs[i].inf.begin(), d.pairs[i].inf.end(), q)) sets.push_back(2 * i + 1);
    }
    if (!sets.empty()) {
      out << " {";
      for (std::size_t i = 0; i < sets.size(); ++i) out << (i ? " " : "") << sets[i];
      out << '}';
    }
    out << "\n";
    std::map<StateIndex, std::vector<PropSet>> by_target;
    for (std::size_t s = 0; s < d.alphabet.size(); ++s) by_target[d.delta[q][s]].push_back(d.alphabet[s]);
    for (const auto& [target, symbols] : by_target) {
      out << '[';
      for (std::size_t i = 0; i < symbols.size(); ++i) {
        out << (i ? " | " : "") << detail::hoa::cube(symbols[i], ap_count);
      }
      out << "] " << target << "\n";
    }
  }
  out << "--END--\n";
  return out.str();
}

/// Parses a deterministic Rabin automaton. The alphabet is the set of
/// symbols every state has an edge for. Throws ParseError on malformed
/// text and UnsupportedError, naming the offending header, on features
/// outside the supported fragment.
inline RabinAutomaton import_hoa(std::string_view text) {
  return detail::hoa::Parser(detail::hoa::lex(text)).parse();
}

}  // namespace ltlmdp
