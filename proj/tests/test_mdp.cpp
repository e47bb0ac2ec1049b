#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "ltlmdp/env.hpp"
#include "ltlmdp/mdp.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ltlmdp;

namespace {

// Sum of path probabilities over every length-n path that follows
// `policy` (state -> position in choices), by full tree enumeration.
double total_path_mass(const SparseMdp& m, std::size_t n, const std::vector<std::size_t>& policy) {
  double total = 0.0;
  std::function<void(FinitePath&)> grow = [&](FinitePath& p) {
    if (p.actions.size() == n) {
      total += path_probability(m, p);
      return;
    }
    const auto& c = m.choices[p.states.back()][policy[p.states.back()]];
    for (const auto& t : c.transitions) {
      p.actions.push_back(c.action);
      p.states.push_back(t.target);
      grow(p);
      p.actions.pop_back();
      p.states.pop_back();
    }
  };
  for (StateIndex s = 0; s < m.state_count(); ++s) {
    if (m.initial[s] <= 0.0) continue;
    FinitePath p{{s}, {}};
    grow(p);
  }
  return total;
}

}  // namespace

TEST(BuildMdp, CaseStudyHasFifteenStates) {
  auto model = support::load("casestudy.json");
  auto m = build_mdp(model);
  EXPECT_EQ(m.state_count(), 15u);
  check_stochastic(m.graph, 1e-9);
  std::size_t expected = 0;
  for (VertexIndex v = 0; v < model.environment.vertex_count(); ++v) {
    expected += enumerate_observations(model.environment, model.observation, v).size();
  }
  EXPECT_EQ(m.state_count(), expected);
  auto v13 = *model.environment.find_vertex("v13");
  EXPECT_EQ(m.vertex_offset[v13 + 1] - m.vertex_offset[v13], 2u);
}

TEST(BuildMdp, LabelsAreObservations) {
  auto m = build_mdp(support::load("casestudy.json"));
  for (StateIndex s = 0; s < m.state_count(); ++s) EXPECT_EQ(m.label(s), m.states[s].observation);
  EXPECT_EQ(m.format_state(*m.find_state(12, PropSet::of({0, 1}))), "(v13,{pickup,observe9})");
}

TEST(BuildMdp, DeterministicObservationsReproduceMotionModel) {
  auto model = load_environment(support::chain_model(1.0));
  auto m = build_mdp(model);
  ASSERT_EQ(m.state_count(), model.environment.vertex_count());
  for (StateIndex s = 0; s < m.state_count(); ++s) {
    for (const auto& c : m.graph.choices[s]) {
      for (const auto& t : c.transitions) {
        EXPECT_EQ(t.probability, model.motion.probability(m.states[s].vertex, c.action, m.states[t.target].vertex));
      }
    }
  }
  EXPECT_EQ(m.graph.initial[0], 1.0);
}

TEST(BuildMdp, KernelIsMotionTimesObservation) {
  auto model = load_environment(support::chain_model(0.3));
  auto m = build_mdp(model);
  ASSERT_EQ(m.state_count(), 3u);
  auto s0 = *m.find_state(0, PropSet{});
  auto with_a = *m.find_state(1, PropSet::of({0}));
  auto without = *m.find_state(1, PropSet{});
  EXPECT_DOUBLE_EQ(m.graph.probability(s0, 0, with_a), 1.0 * 0.3);
  EXPECT_DOUBLE_EQ(m.graph.probability(s0, 0, without), 1.0 * 0.7);
}

TEST(BuildMdp, InitialDistributionSplitsOverObservations) {
  auto text = support::chain_model(0.3);
  text.replace(text.find(R"("initial": "v1")"), 15, R"("initial": "v2")");
  auto m = build_mdp(load_environment(text));
  EXPECT_DOUBLE_EQ(m.graph.initial[*m.find_state(1, PropSet{})], 0.7);
  EXPECT_DOUBLE_EQ(m.graph.initial[*m.find_state(1, PropSet::of({0}))], 0.3);
}

TEST(PathProbability, EmptyPathIsInitialMass) {
  auto m = build_mdp(load_environment(support::chain_model(0.3)));
  EXPECT_DOUBLE_EQ(path_probability(m, {{0}, {}}), 1.0);
}

TEST(PathProbability, DeterministicChain) {
  auto m = build_mdp(load_environment(support::chain_model(1.0)));
  EXPECT_DOUBLE_EQ(path_probability(m, {{0, 1, 0, 1}, {0, 0, 0}}), 1.0);
}

TEST(PathProbability, InvalidPathsRejected) {
  auto m = build_mdp(load_environment(support::chain_model(1.0)));
  EXPECT_THROW(path_probability(m, {{0, 0}, {0}}), InputError);
  EXPECT_THROW(path_probability(m, {{1}, {}}), InputError);
  EXPECT_THROW(path_probability(m, {{0, 1}, {}}), InputError);
  EXPECT_THROW(path_probability(m, {{0, 7}, {0}}), InputError);
}

TEST(PathProbability, CylindersSumToOne) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = oracle::random_mdp(rng, 1 + trial % 5, 2);
    std::vector<std::size_t> policy(m.state_count());
    for (StateIndex s = 0; s < m.state_count(); ++s) policy[s] = rng() % m.choices[s].size();
    for (std::size_t n : {0u, 1u, 3u}) EXPECT_NEAR(total_path_mass(m, n, policy), 1.0, 1e-6);
  }
}

TEST(PathProbability, ThreeStepPathMatchesTreeEnumeration) {
  std::mt19937_64 rng(17);
  auto m = oracle::random_mdp(rng, 3, 1);
  std::vector<std::size_t> policy(3, 0);
  double sum = 0.0;
  std::function<void(FinitePath&)> grow = [&](FinitePath& p) {
    if (p.actions.size() == 3) {
      double direct = m.initial[p.states[0]];
      for (std::size_t i = 0; i < 3; ++i) direct *= m.probability(p.states[i], 0, p.states[i + 1]);
      EXPECT_NEAR(path_probability(m, p), direct, 1e-15);
      sum += direct;
      return;
    }
    for (const auto& t : m.choices[p.states.back()][0].transitions) {
      p.states.push_back(t.target);
      p.actions.push_back(0);
      grow(p);
      p.states.pop_back();
      p.actions.pop_back();
    }
  };
  FinitePath p{{0}, {}};
  grow(p);
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Dump, IsDeterministic) {
  auto model = support::load("casestudy.json");
  auto a = dump(build_mdp(model));
  auto b = dump(build_mdp(model));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind("states 15\nactions alpha beta gamma\ns 0 (v1,{}) init 1.000000\n", 0), 0u);
}
