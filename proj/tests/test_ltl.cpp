#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "ltlmdp/ltl.hpp"

using namespace ltlmdp;
using namespace ltlmdp::ltl;

namespace {

const std::vector<std::string> kAB = {"a", "b"};
const PropSet kNone{};
const PropSet kA = PropSet::of({0});
const PropSet kB = PropSet::of({1});
const PropSet kBoth = PropSet::of({0, 1});

bool holds(const std::string& f, const LassoWord& w) { return eval_lasso(parse(f), w, kAB); }

}  // namespace

TEST(Parse, Precedence) {
  EXPECT_EQ(to_string(parse("a && b || c")), "((a && b) || c)");
  EXPECT_EQ(to_string(parse("a || b && c")), "(a || (b && c))");
  EXPECT_EQ(to_string(parse("a -> b -> c")), "(a -> (b -> c))");
  EXPECT_EQ(to_string(parse("a U b U c")), "(a U (b U c))");
  EXPECT_EQ(to_string(parse("a U b && c")), "((a U b) && c)");
  EXPECT_EQ(to_string(parse("!a U X b")), "(!a U X b)");
  EXPECT_EQ(to_string(parse("G F a -> b R c")), "(G F a -> (b R c))");
}

TEST(Parse, Aliases) {
  EXPECT_EQ(parse("[] <> a"), parse("G F a"));
  EXPECT_EQ(parse("G(a -> X b)"), always(implies(Formula::atom("a"), next(Formula::atom("b")))));
}

TEST(Parse, RoundTripsThroughPrinter) {
  for (const char* text : {"G F pickup && G(pickup && !observe9 -> X(!pickup U event7))", "true U (false R !a)",
                           "X X X a", "!(a || b)", "F G !a"}) {
    auto f = parse(text);
    EXPECT_EQ(parse(to_string(f)), f) << text;
  }
}

TEST(Parse, ErrorsCarryColumn) {
  try {
    parse("a && (b || )");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.column(), 12u);
  }
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("a b"), ParseError);
  EXPECT_THROW(parse("a $ b"), ParseError);
  EXPECT_THROW(parse("(a"), ParseError);
}

TEST(Formula, SizeAndAtoms) {
  auto f = parse("G(b -> F a) && b");
  EXPECT_EQ(size(f), 7u);
  EXPECT_EQ(atoms(f), (std::vector<std::string>{"b", "a"}));
}

TEST(Nnf, PushesNegationsToAtoms) {
  EXPECT_EQ(to_nnf(parse("!(a U b)")), parse("!a R !b"));
  EXPECT_EQ(to_nnf(parse("!G a")), parse("true U !a"));
  EXPECT_EQ(to_nnf(parse("!F a")), parse("false R !a"));
  EXPECT_EQ(to_nnf(parse("a -> b")), parse("!a || b"));
  EXPECT_EQ(to_nnf(parse("!!a")), parse("a"));
  EXPECT_EQ(to_nnf(parse("!X !a")), parse("X a"));
  EXPECT_TRUE(is_nnf(to_nnf(parse("!(G(a -> X b) && !(a R F b))"))));
  EXPECT_FALSE(is_nnf(parse("F a")));
}

TEST(Nnf, PreservesSemantics) {
  const std::vector<PropSet> letters = {kNone, kA, kB, kBoth};
  for (const char* text : {"!(a U b)", "!G F a", "!(a R X b)", "(a -> F b) && !G a"}) {
    auto f = parse(text);
    auto g = to_nnf(f);
    for (auto p : letters) {
      for (auto c1 : letters) {
        for (auto c2 : letters) {
          LassoWord w{{p}, {c1, c2}};
          EXPECT_EQ(eval_lasso(f, w, kAB), eval_lasso(g, w, kAB)) << text;
        }
      }
    }
  }
}

TEST(Lasso, BasicOperators) {
  EXPECT_TRUE(holds("G F a", {{}, {kA, kNone}}));
  EXPECT_FALSE(holds("G F a", {{kA}, {kNone}}));
  EXPECT_TRUE(holds("F G a", {{kNone}, {kA}}));
  EXPECT_FALSE(holds("F G a", {{}, {kA, kNone}}));
  EXPECT_TRUE(holds("a U b", {{kA, kA}, {kB}}));
  EXPECT_FALSE(holds("a U b", {{kA, kNone}, {kB}}));
  EXPECT_FALSE(holds("a U b", {{}, {kA}}));
  EXPECT_TRUE(holds("a R b", {{}, {kB}}));
  EXPECT_TRUE(holds("a R b", {{kB}, {kBoth}}));
  EXPECT_FALSE(holds("a R b", {{kB}, {kNone}}));
  EXPECT_TRUE(holds("X X a", {{kNone, kNone}, {kA}}));
  EXPECT_FALSE(holds("X X a", {{kNone, kNone, kNone}, {kA}}));
  EXPECT_TRUE(holds("true", {{}, {kNone}}));
  EXPECT_FALSE(holds("false", {{}, {kBoth}}));
}

TEST(Lasso, NestedFixpointsAcrossTheLoop) {
  // The R must see the inner U fulfilled later in the loop.
  EXPECT_TRUE(holds("G (b U a)", {{}, {kB, kB, kA}}));
  EXPECT_FALSE(holds("G (b U a)", {{}, {kB, kNone, kA}}));
  EXPECT_TRUE(holds("(a R (b U a))", {{kB}, {kB, kA}}));
  EXPECT_TRUE(holds("G F (a && X b)", {{}, {kA, kB, kNone}}));
}

TEST(Lasso, UnknownAtomsAreFalse) {
  EXPECT_FALSE(eval_lasso(parse("F c"), {{}, {kBoth}}, kAB));
  EXPECT_TRUE(eval_lasso(parse("G !c"), {{}, {kBoth}}, kAB));
}

TEST(Lasso, EmptyCycleRejected) { EXPECT_THROW(holds("a", {{kA}, {}}), InputError); }
