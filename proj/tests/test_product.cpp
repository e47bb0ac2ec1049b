#include <gtest/gtest.h>

#include <numeric>

#include "ltlmdp/automata.hpp"
#include "ltlmdp/hoa.hpp"
#include "ltlmdp/ltl.hpp"
#include "ltlmdp/mdp.hpp"
#include "ltlmdp/product.hpp"
#include "support.hpp"

using namespace ltlmdp;

namespace {

struct CaseStudy {
  Model model = support::load("casestudy.json");
  LabeledMdp mdp = build_mdp(model);
  RabinAutomaton dra = ltl_to_dra(ltl::parse(*model.formula));
};

}  // namespace

TEST(Product, UnprunedSizeIsStatesTimesAutomaton) {
  CaseStudy cs;
  auto p = build_product(cs.mdp, cs.dra, {false});
  EXPECT_EQ(p.state_count(), cs.mdp.state_count() * cs.dra.state_count());
  ASSERT_EQ(p.pairs.size(), cs.dra.pairs.size());
  for (std::size_t i = 0; i < p.pairs.size(); ++i) {
    EXPECT_EQ(p.pairs[i].fin_count(), cs.mdp.state_count() * cs.dra.pairs[i].fin.size());
    EXPECT_EQ(p.pairs[i].inf_count(), cs.mdp.state_count() * cs.dra.pairs[i].inf.size());
  }
  for (StateIndex i = 0; i < p.state_count(); ++i) {
    EXPECT_EQ(i, p.back_map[i].mdp_state * cs.dra.state_count() + p.back_map[i].automaton_state);
  }
}

TEST(Product, KernelFollowsAutomaton) {
  CaseStudy cs;
  auto symbol = label_symbols(cs.mdp, cs.dra);
  for (bool prune : {true, false}) {
    auto p = build_product(cs.mdp, cs.dra, {prune});
    check_stochastic(p.graph, 1e-9);
    for (StateIndex i = 0; i < p.state_count(); ++i) {
      auto [s, q] = p.back_map[i];
      ASSERT_EQ(p.graph.choices[i].size(), cs.mdp.graph.choices[s].size());
      for (const auto& c : p.graph.choices[i]) {
        for (const auto& t : c.transitions) {
          auto [s2, q2] = p.back_map[t.target];
          EXPECT_EQ(q2, cs.dra.delta[q][symbol[s2]]);
          EXPECT_EQ(t.probability, cs.mdp.graph.probability(s, c.action, s2));
        }
      }
      double expect_init = 0.0;
      if (q == cs.dra.delta[cs.dra.initial][symbol[s]]) expect_init = cs.mdp.graph.initial[s];
      EXPECT_EQ(p.graph.initial[i], expect_init);
    }
  }
}

TEST(Product, PruningKeepsReachablePart) {
  CaseStudy cs;
  auto pruned = build_product(cs.mdp, cs.dra);
  auto full = build_product(cs.mdp, cs.dra, {false});
  EXPECT_LT(pruned.state_count(), full.state_count());
  for (const auto& ps : pruned.back_map) EXPECT_TRUE(full.find(ps.mdp_state, ps.automaton_state).has_value());
}

TEST(Product, SingleStateAutomatonGivesCopyOfMdp) {
  CaseStudy cs;
  auto d = support::universal_dra();
  auto p = build_product(cs.mdp, d, {false});
  EXPECT_EQ(p.graph, cs.mdp.graph);
}

TEST(Product, UnknownPropositionRejected) {
  CaseStudy cs;
  EXPECT_THROW(build_product(cs.mdp, ltl_to_dra(ltl::parse("F dock"))), InputError);
}

TEST(Product, LabelOutsideRestrictedAlphabetRejected) {
  CaseStudy cs;
  auto d = restrict_alphabet(ltl_to_dra(ltl::parse("F pickup")), {PropSet::of({0})});
  EXPECT_THROW(build_product(cs.mdp, d), InputError);
}

TEST(Product, ImportedAutomatonWorks) {
  auto model = load_environment(R"({
    "vertices": [
      {"id": "x", "edges": ["y"], "enabled": ["go"], "obs": {"a": 1.0}},
      {"id": "y", "edges": ["x"], "enabled": ["go"], "obs": {"b": 0.5}}
    ],
    "actions": ["go"],
    "propositions": ["a", "b"],
    "initial": "x",
    "motion": [
      {"from": "x", "action": "go", "to": "y", "prob": 1.0},
      {"from": "y", "action": "go", "to": "x", "prob": 1.0}
    ]
  })");
  auto m = build_mdp(model);
  auto d = import_hoa(support::read(support::model_path("gfa_gfb.hoa")));
  auto p = build_product(m, d, {false});
  EXPECT_EQ(p.state_count(), m.state_count() * 5);
  EXPECT_EQ(p.pairs[0].inf_count(), m.state_count() * 2);
}

TEST(Product, StatsFormat) {
  CaseStudy cs;
  auto p = build_product(cs.mdp, cs.dra, {false});
  auto text = stats(p);
  EXPECT_EQ(text.rfind("states " + std::to_string(p.state_count()) + "\npairs 1\npair 0 L ", 0), 0u);
}
