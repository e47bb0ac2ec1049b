#pragma once

// Linear temporal logic over named atomic propositions.
//
// Surface syntax, loosest to tightest binding:
//   ->            right associative
//   ||  (|)
//   &&  (&)
//   U  R          right associative
//   !  X  F  G    prefix; [] and <> are aliases of G and F
// Atoms are identifiers; `true` and `false` are literals.

#include <cctype>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ltlmdp/error.hpp"
#include "ltlmdp/prop_set.hpp"

namespace ltlmdp::ltl {

enum class Op { Atom, True, False, Not, And, Or, Implies, Next, Until, Release, Eventually, Always };

inline bool is_binary(Op op) {
  return op == Op::And || op == Op::Or || op == Op::Implies || op == Op::Until || op == Op::Release;
}

struct Formula {
  Op op = Op::True;
  std::string name;           // atoms only
  std::vector<Formula> args;  // one child for unary, two for binary

  static Formula atom(std::string n) { return {Op::Atom, std::move(n), {}}; }
  static Formula truth() { return {Op::True, {}, {}}; }
  static Formula falsity() { return {Op::False, {}, {}}; }
  static Formula unary(Op op, Formula f) {
    Formula out{op, {}, {}};
    out.args.push_back(std::move(f));
    return out;
  }
  static Formula binary(Op op, Formula l, Formula r) {
    Formula out{op, {}, {}};
    out.args.push_back(std::move(l));
    out.args.push_back(std::move(r));
    return out;
  }

  const Formula& lhs() const { return args.at(0); }
  const Formula& rhs() const { return args.at(1); }

  friend bool operator==(const Formula& a, const Formula& b) {
    return a.op == b.op && a.name == b.name && a.args == b.args;
  }
};

inline Formula operator!(Formula f) { return Formula::unary(Op::Not, std::move(f)); }
inline Formula operator&&(Formula a, Formula b) { return Formula::binary(Op::And, std::move(a), std::move(b)); }
inline Formula operator||(Formula a, Formula b) { return Formula::binary(Op::Or, std::move(a), std::move(b)); }
inline Formula next(Formula f) { return Formula::unary(Op::Next, std::move(f)); }
inline Formula eventually(Formula f) { return Formula::unary(Op::Eventually, std::move(f)); }
inline Formula always(Formula f) { return Formula::unary(Op::Always, std::move(f)); }
inline Formula implies(Formula a, Formula b) { return Formula::binary(Op::Implies, std::move(a), std::move(b)); }
inline Formula until(Formula a, Formula b) { return Formula::binary(Op::Until, std::move(a), std::move(b)); }
inline Formula release(Formula a, Formula b) { return Formula::binary(Op::Release, std::move(a), std::move(b)); }

/// Number of AST nodes.
inline std::size_t size(const Formula& f) {
  std::size_t n = 1;
  for (const auto& a : f.args) n += size(a);
  return n;
}

/// Atom names in order of first occurrence.
inline std::vector<std::string> atoms(const Formula& f) {
  std::vector<std::string> out;
  auto visit = [&](auto& self, const Formula& g) -> void {
    if (g.op == Op::Atom) {
      for (const auto& n : out) {
        if (n == g.name) return;
      }
      out.push_back(g.name);
      return;
    }
    for (const auto& a : g.args) self(self, a);
  };
  visit(visit, f);
  return out;
}

namespace detail {

enum class Tok { Ident, True, False, Not, Next, Eventually, Always, Until, Release, And, Or, Implies, LParen, RParen, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;  // 1-based column
};

inline std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto at = [&](std::size_t k) { return k < text.size() ? text[k] : '\0'; };
  while (i < text.size()) {
    char c = text[i];
    std::size_t col = i + 1;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      std::string word(text.substr(i, j - i));
      Tok kind = Tok::Ident;
      if (word == "true") kind = Tok::True;
      else if (word == "false") kind = Tok::False;
      else if (word == "X") kind = Tok::Next;
      else if (word == "F") kind = Tok::Eventually;
      else if (word == "G") kind = Tok::Always;
      else if (word == "U") kind = Tok::Until;
      else if (word == "R") kind = Tok::Release;
      out.push_back({kind, std::move(word), col});
      i = j;
      continue;
    }
    auto two = [&](char a, char b) { return c == a && at(i + 1) == b; };
    if (two('&', '&')) { out.push_back({Tok::And, "&&", col}); i += 2; continue; }
    if (two('|', '|')) { out.push_back({Tok::Or, "||", col}); i += 2; continue; }
    if (two('-', '>')) { out.push_back({Tok::Implies, "->", col}); i += 2; continue; }
    if (two('[', ']')) { out.push_back({Tok::Always, "[]", col}); i += 2; continue; }
    if (two('<', '>')) { out.push_back({Tok::Eventually, "<>", col}); i += 2; continue; }
    switch (c) {
      case '&': out.push_back({Tok::And, "&", col}); break;
      case '|': out.push_back({Tok::Or, "|", col}); break;
      case '!': out.push_back({Tok::Not, "!", col}); break;
      case '(': out.push_back({Tok::LParen, "(", col}); break;
      case ')': out.push_back({Tok::RParen, ")", col}); break;
      default: throw ParseError(std::string("unexpected character '") + c + "'", 1, col);
    }
    ++i;
  }
  out.push_back({Tok::End, "", text.size() + 1});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Formula parse() {
    if (peek().kind == Tok::End) throw ParseError("empty formula", 1, peek().pos);
    Formula f = implication();
    if (peek().kind != Tok::End) throw error("unexpected '" + peek().text + "'");
    return f;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  Token take() { return tokens_[pos_++]; }
  ParseError error(const std::string& what) const { return ParseError(what, 1, peek().pos); }

  Formula implication() {
    Formula lhs = disjunction();
    if (peek().kind == Tok::Implies) {
      take();
      return implies(std::move(lhs), implication());
    }
    return lhs;
  }

  Formula disjunction() {
    Formula lhs = conjunction();
    while (peek().kind == Tok::Or) {
      take();
      lhs = std::move(lhs) || conjunction();
    }
    return lhs;
  }

  Formula conjunction() {
    Formula lhs = temporal();
    while (peek().kind == Tok::And) {
      take();
      lhs = std::move(lhs) && temporal();
    }
    return lhs;
  }

  Formula temporal() {
    Formula lhs = prefix();
    if (peek().kind == Tok::Until) {
      take();
      return until(std::move(lhs), temporal());
    }
    if (peek().kind == Tok::Release) {
      take();
      return release(std::move(lhs), temporal());
    }
    return lhs;
  }

  Formula prefix() {
    switch (peek().kind) {
      case Tok::Not: take(); return !prefix();
      case Tok::Next: take(); return next(prefix());
      case Tok::Eventually: take(); return eventually(prefix());
      case Tok::Always: take(); return always(prefix());
      default: return primary();
    }
  }

  Formula primary() {
    switch (peek().kind) {
      case Tok::Ident: return Formula::atom(take().text);
      case Tok::True: take(); return Formula::truth();
      case Tok::False: take(); return Formula::falsity();
      case Tok::LParen: {
        take();
        Formula f = implication();
        if (peek().kind != Tok::RParen) throw error("expected ')'");
        take();
        return f;
      }
      case Tok::End: throw error("unexpected end of formula");
      default: throw error("unexpected '" + peek().text + "'");
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a formula. Throws ParseError carrying the column of the problem.
inline Formula parse(std::string_view text) { return detail::Parser(detail::lex(text)).parse(); }

/// Prints a formula that parses back to the same tree. Binary operators are
/// always parenthesized.
inline std::string to_string(const Formula& f) {
  switch (f.op) {
    case Op::Atom: return f.name;
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Not: return "!" + to_string(f.lhs());
    case Op::Next: return "X " + to_string(f.lhs());
    case Op::Eventually: return "F " + to_string(f.lhs());
    case Op::Always: return "G " + to_string(f.lhs());
    case Op::And: return "(" + to_string(f.lhs()) + " && " + to_string(f.rhs()) + ")";
    case Op::Or: return "(" + to_string(f.lhs()) + " || " + to_string(f.rhs()) + ")";
    case Op::Implies: return "(" + to_string(f.lhs()) + " -> " + to_string(f.rhs()) + ")";
    case Op::Until: return "(" + to_string(f.lhs()) + " U " + to_string(f.rhs()) + ")";
    case Op::Release: return "(" + to_string(f.lhs()) + " R " + to_string(f.rhs()) + ")";
  }
  return {};
}

/// True when negation occurs only directly above atoms and only
/// And/Or/Next/Until/Release connect subformulas.
inline bool is_nnf(const Formula& f) {
  switch (f.op) {
    case Op::Atom:
    case Op::True:
    case Op::False: return true;
    case Op::Not: return f.lhs().op == Op::Atom;
    case Op::Implies:
    case Op::Eventually:
    case Op::Always: return false;
    default:
      for (const auto& a : f.args) {
        if (!is_nnf(a)) return false;
      }
      return true;
  }
}

namespace detail {

inline Formula nnf(const Formula& f);

inline Formula negated_nnf(const Formula& f) {
  switch (f.op) {
    case Op::Atom: return !Formula(f);
    case Op::True: return Formula::falsity();
    case Op::False: return Formula::truth();
    case Op::Not: return nnf(f.lhs());
    case Op::And: return negated_nnf(f.lhs()) || negated_nnf(f.rhs());
    case Op::Or: return negated_nnf(f.lhs()) && negated_nnf(f.rhs());
    case Op::Implies: return nnf(f.lhs()) && negated_nnf(f.rhs());
    case Op::Next: return next(negated_nnf(f.lhs()));
    case Op::Until: return release(negated_nnf(f.lhs()), negated_nnf(f.rhs()));
    case Op::Release: return until(negated_nnf(f.lhs()), negated_nnf(f.rhs()));
    case Op::Eventually: return release(Formula::falsity(), negated_nnf(f.lhs()));
    case Op::Always: return until(Formula::truth(), negated_nnf(f.lhs()));
  }
  return f;
}

inline Formula nnf(const Formula& f) {
  switch (f.op) {
    case Op::Atom:
    case Op::True:
    case Op::False: return f;
    case Op::Not: return negated_nnf(f.lhs());
    case Op::Implies: return negated_nnf(f.lhs()) || nnf(f.rhs());
    case Op::Eventually: return until(Formula::truth(), nnf(f.lhs()));
    case Op::Always: return release(Formula::falsity(), nnf(f.lhs()));
    case Op::Next: return next(nnf(f.lhs()));
    default: return Formula::binary(f.op, nnf(f.lhs()), nnf(f.rhs()));
  }
}

}  // namespace detail

/// Negation normal form over {atoms, negated atoms, true, false, &&, ||, X, U, R}.
inline Formula to_nnf(const Formula& f) { return detail::nnf(f); }

/// An ultimately periodic word prefix . cycle^omega. Letters are sets of
/// indices into a proposition list supplied alongside the word.
struct LassoWord {
  std::vector<PropSet> prefix;
  std::vector<PropSet> cycle;

  std::size_t length() const noexcept { return prefix.size() + cycle.size(); }
  PropSet at(std::size_t i) const { return i < prefix.size() ? prefix[i] : cycle[i - prefix.size()]; }
};

namespace detail {

// Truth of `f` at each of the word's distinct positions. Position
// length()-1 is followed by position prefix.size().
inline std::vector<bool> evaluate(const Formula& f, const LassoWord& w, std::span<const std::string> props) {
  const std::size_t n = w.length();
  const std::size_t loop = w.prefix.size();
  auto succ = [&](std::size_t i) { return i + 1 < n ? i + 1 : loop; };
  std::vector<bool> out(n, false);
  switch (f.op) {
    case Op::True: out.assign(n, true); break;
    case Op::False: break;
    case Op::Atom: {
      for (std::size_t p = 0; p < props.size(); ++p) {
        if (props[p] != f.name) continue;
        for (std::size_t i = 0; i < n; ++i) out[i] = w.at(i).contains(p);
      }
      break;
    }
    case Op::Not: {
      auto a = evaluate(f.lhs(), w, props);
      for (std::size_t i = 0; i < n; ++i) out[i] = !a[i];
      break;
    }
    case Op::And:
    case Op::Or:
    case Op::Implies: {
      auto a = evaluate(f.lhs(), w, props);
      auto b = evaluate(f.rhs(), w, props);
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = f.op == Op::And ? (a[i] && b[i]) : f.op == Op::Or ? (a[i] || b[i]) : (!a[i] || b[i]);
      }
      break;
    }
    case Op::Next: {
      auto a = evaluate(f.lhs(), w, props);
      for (std::size_t i = 0; i < n; ++i) out[i] = a[succ(i)];
      break;
    }
    case Op::Eventually:
    case Op::Always: {
      Formula expanded = f.op == Op::Eventually ? until(Formula::truth(), f.lhs()) : release(Formula::falsity(), f.lhs());
      return evaluate(expanded, w, props);
    }
    case Op::Until:
    case Op::Release: {
      // Least (until) or greatest (release) fixpoint. Two backward sweeps
      // reach it: the first makes the loop entry exact, the second
      // propagates it around the loop and into the prefix.
      auto a = evaluate(f.lhs(), w, props);
      auto b = evaluate(f.rhs(), w, props);
      const bool is_until = f.op == Op::Until;
      out.assign(n, !is_until);
      for (int sweep = 0; sweep < 2; ++sweep) {
        for (std::size_t k = n; k-- > 0;) {
          bool later = out[succ(k)];
          out[k] = is_until ? (b[k] || (a[k] && later)) : (b[k] && (a[k] || later));
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Whether prefix . cycle^omega satisfies `f`. Atoms missing from `props`
/// are false everywhere.
inline bool eval_lasso(const Formula& f, const LassoWord& w, std::span<const std::string> props) {
  if (w.cycle.empty()) throw InputError("lasso cycle must be nonempty");
  return detail::evaluate(f, w, props).front();
}

}  // namespace ltlmdp::ltl
