#include <gtest/gtest.h>

#include <string>

#include "ltlmdp/env.hpp"
#include "support.hpp"

using namespace ltlmdp;

namespace {

std::string replace(std::string text, const std::string& from, const std::string& to) {
  auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST(Environment, LoadsCaseStudy) {
  auto m = support::load("casestudy.json");
  EXPECT_EQ(m.environment.vertex_count(), 13u);
  EXPECT_EQ(m.motion.actions.size(), 3u);
  EXPECT_EQ(m.environment.propositions.size(), 4u);
  EXPECT_EQ(m.environment.vertices[m.environment.initial], "v1");
  ASSERT_TRUE(m.formula.has_value());
  auto v13 = *m.environment.find_vertex("v13");
  EXPECT_DOUBLE_EQ(m.observation.at(v13, *m.environment.find_proposition("observe9")), 0.4);
}

TEST(Environment, SerializeRoundTrips) {
  auto m = support::load("casestudy.json");
  EXPECT_EQ(load_environment(serialize(m)), m);
}

TEST(Environment, RowSumErrorNamesVertexAndAction) {
  auto text = support::read(support::model_path("casestudy.json"));
  text = replace(text, R"("to": "v2",
      "prob": 0.9)", R"("to": "v2",
      "prob": 0.8)");
  try {
    load_environment(text);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("(v1, alpha)"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("0.9"), std::string::npos) << e.what();
  }
}

TEST(Environment, ToleranceIsConfigurable) {
  auto text = replace(support::chain_model(0.5), R"("to": "v2", "prob": 1.0)", R"("to": "v2", "prob": 0.9999)");
  EXPECT_THROW(load_environment(text), ValidationError);
  EXPECT_NO_THROW(load_environment(text, 1e-3));
}

TEST(Environment, RejectsTransitionWithoutEdge) {
  auto text = replace(support::chain_model(0.5), R"("id": "v1", "edges": ["v2"])", R"("id": "v1", "edges": ["v1"])");
  EXPECT_THROW(load_environment(text), ValidationError);
}

TEST(Environment, RejectsObservationProbabilityOutOfRange) {
  EXPECT_THROW(load_environment(support::chain_model(1.5)), ValidationError);
}

TEST(Environment, RejectsEmptyEnabledSet) {
  auto text = replace(support::chain_model(0.5), R"("edges": ["v1"], "enabled": ["u"])",
                      R"("edges": ["v1"], "enabled": [])");
  EXPECT_THROW(load_environment(text), ValidationError);
}

TEST(Environment, RejectsUnknownKey) {
  auto text = replace(support::chain_model(0.5), R"("initial": "v1")", R"("initial": "v1", "start": "v1")");
  EXPECT_THROW(load_environment(text), ParseError);
}

TEST(Environment, ReportsJsonSyntaxLocation) {
  try {
    load_environment("{\n  \"vertices\": [,]\n}");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_GT(e.column(), 0u);
  }
}

TEST(Environment, RejectsUndeclaredInitialVertex) {
  auto text = replace(support::chain_model(0.5), R"("initial": "v1")", R"("initial": "v9")");
  EXPECT_THROW(load_environment(text), ValidationError);
}

TEST(Observations, CertainPropositionsGiveOneSet) {
  auto m = support::load("casestudy.json");
  auto v7 = *m.environment.find_vertex("v7");
  auto z = enumerate_observations(m.environment, m.observation, v7);
  ASSERT_EQ(z.size(), 1u);
  EXPECT_EQ(m.environment.format(z[0].observed), "{event7}");
  EXPECT_DOUBLE_EQ(z[0].probability, 1.0);
}

TEST(Observations, UncertainPropositionSplits) {
  auto m = support::load("casestudy.json");
  auto v13 = *m.environment.find_vertex("v13");
  auto z = enumerate_observations(m.environment, m.observation, v13);
  ASSERT_EQ(z.size(), 2u);
  EXPECT_EQ(m.environment.format(z[0].observed), "{pickup}");
  EXPECT_DOUBLE_EQ(z[0].probability, 0.6);
  EXPECT_EQ(m.environment.format(z[1].observed), "{pickup,observe9}");
  EXPECT_DOUBLE_EQ(z[1].probability, 0.4);
}

TEST(Observations, ProbabilitiesMatchProductFormula) {
  Environment env{{"v"}, {{0}}, {"a", "b", "c"}, 0};
  ObservationModel om{{{0.3, 0.5, 1.0}}};
  auto z = enumerate_observations(env, om, 0);
  ASSERT_EQ(z.size(), 4u);
  double total = 0.0;
  for (const auto& o : z) {
    EXPECT_TRUE(o.observed.contains(2));
    double expect = (o.observed.contains(0) ? 0.3 : 0.7) * 0.5;
    EXPECT_NEAR(o.probability, expect, 1e-15);
    EXPECT_NEAR(observation_probability(om, 0, o.observed), expect, 1e-15);
    total += o.probability;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(observation_probability(om, 0, PropSet::of({0, 1})), 0.0);
}

TEST(Observations, CapacityLimit) {
  Environment env{{"v"}, {{0}}, {"a", "b", "c"}, 0};
  ObservationModel om{{{0.3, 0.5, 0.5}}};
  EXPECT_THROW(enumerate_observations(env, om, 0, 2), CapacityError);
  EXPECT_EQ(enumerate_observations(env, om, 0, 3).size(), 8u);
}

TEST(Observations, RealizableSetsOfCaseStudy) {
  auto m = support::load("casestudy.json");
  EXPECT_EQ(realizable_observations(m).size(), 5u);
}
