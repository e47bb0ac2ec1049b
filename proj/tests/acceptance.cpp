// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit status
// if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ltlmdp/automata.hpp"
#include "ltlmdp/hoa.hpp"
#include "ltlmdp/ltl.hpp"
#include "ltlmdp/mdp.hpp"
#include "ltlmdp/product.hpp"
#include "ltlmdp/sim.hpp"
#include "ltlmdp/synthesis.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ltlmdp;

namespace {

constexpr double kProbabilityTolerance = 1e-6;
constexpr double kOracleTolerance = 1e-7;
constexpr double kResidualTolerance = 1e-8;
constexpr double kBuildSeconds = 1.0;
constexpr double kSynthesisSeconds = 60.0;
constexpr double kSimulationSeconds = 30.0;
constexpr double kSignificance = 0.01;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Instance {
  Model model;
  LabeledMdp mdp;
  RabinAutomaton dra;
  ProductMdp product;
  Synthesis result;

  Instance(Model m, const std::string& formula)
      : model(std::move(m)),
        mdp(build_mdp(model)),
        dra(ltl_to_dra(ltl::parse(formula))),
        product(build_product(mdp, dra)),
        result(synthesize(product)) {}
};

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d %s %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void guarded(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace

int main() {
  const Model casestudy = support::load("casestudy.json");
  const Model coinflip = support::load("coinflip.json");

  guarded(1, [&] {
    auto t = Clock::now();
    auto m = build_mdp(casestudy);
    double s = seconds_since(t);
    report(1, m.state_count() == 15 && s < kBuildSeconds, fmt("states %.0f in %.3fs", double(m.state_count()), s));
  });

  guarded(2, [&] {
    auto t = Clock::now();
    Instance in(casestudy, *casestudy.formula);
    double s = seconds_since(t);
    bool ok = std::abs(in.result.probability - 1.0) <= kProbabilityTolerance && s < kSynthesisSeconds;
    report(2, ok, fmt("probability %.9f in %.3fs", in.result.probability, s));
  });

  guarded(3, [&] {
    // Unpruned products multiply state and pair sizes: the case study and
    // the bundled two-recurrence HOA automaton on a two-vertex model.
    std::string detail;
    bool ok = true;
    auto check = [&](const LabeledMdp& m, const RabinAutomaton& d, const char* name) {
      auto p = build_product(m, d, {false});
      bool good = p.state_count() == m.state_count() * d.state_count() && p.pairs.size() == d.pairs.size();
      for (std::size_t i = 0; good && i < d.pairs.size(); ++i) {
        good = p.pairs[i].fin_count() == m.state_count() * d.pairs[i].fin.size() &&
               p.pairs[i].inf_count() == m.state_count() * d.pairs[i].inf.size();
      }
      ok = ok && good;
      detail += std::string(name) + " " + std::to_string(m.state_count()) + "x" + std::to_string(d.state_count()) +
                "=" + std::to_string(p.state_count()) + " ";
    };
    auto cs = build_mdp(casestudy);
    check(cs, ltl_to_dra(ltl::parse(*casestudy.formula)), "casestudy");
    auto two = build_mdp(load_environment(R"({
      "vertices": [
        {"id": "x", "edges": ["y"], "enabled": ["go"], "obs": {"a": 1.0}},
        {"id": "y", "edges": ["x"], "enabled": ["go"], "obs": {"b": 0.5}}
      ],
      "actions": ["go"], "propositions": ["a", "b"], "initial": "x",
      "motion": [{"from": "x", "action": "go", "to": "y", "prob": 1.0},
                 {"from": "y", "action": "go", "to": "x", "prob": 1.0}]
    })"));
    check(two, import_hoa(support::read(support::model_path("gfa_gfb.hoa"))), "gfa_gfb.hoa");
    report(3, ok, detail);
  });

  guarded(4, [&] {
    auto t = Clock::now();
    Instance cs(casestudy, *casestudy.formula);
    auto e = Simulator(cs.model, cs.mdp, cs.dra, cs.product, cs.result.policy).estimate(2000, 200, 1);
    Instance cf(coinflip, *coinflip.formula);
    auto f = Simulator(cf.model, cf.mdp, cf.dra, cf.product, cf.result.policy).estimate(2000, 200, 1);
    double s = seconds_since(t);
    bool ok = e.fraction >= 0.99 && f.lower <= 0.5 && 0.5 <= f.upper && s < kSimulationSeconds;
    report(4, ok,
           fmt("casestudy %.4f coinflip [%.4f, %.4f]", e.fraction, f.lower, f.upper) + fmt(" in %.3fs", s));
  });

  guarded(5, [&] {
    const std::vector<std::string> ab = {"a", "b"};
    std::mt19937_64 rng(20240);
    int formulas = 0, words = 0, bad = 0;
    for (; formulas < 200; ++formulas) {
      auto f = oracle::random_nnf(rng, 2 + formulas % 7, ab);
      auto d = ltl_to_dra(f);
      oracle::for_each_lasso(full_alphabet(2), 2, 3, [&](const ltl::LassoWord& w) {
        ++words;
        if (dra_accepts_lasso(d, oracle::remap(w, ab, d.propositions)) != ltl::eval_lasso(f, w, ab)) ++bad;
      });
    }
    report(5, bad == 0, fmt("%.0f formulas %.0f lassos %.0f disagreements", formulas, words, bad));
  });

  guarded(6, [&] {
    std::mt19937_64 rng(606);
    int instances = 0, bad = 0;
    for (; instances < 120; ++instances) {
      std::size_t n = 1 + instances % 5;
      auto m = oracle::random_mdp(rng, n, 2);
      if (find_mecs(m) != oracle::mecs(m, {})) ++bad;
    }
    report(6, bad == 0, fmt("%.0f instances %.0f mismatches", instances, bad));
  });

  guarded(7, [&] {
    std::mt19937_64 rng(707);
    int instances = 0;
    double worst = 0.0;
    for (; instances < 120; ++instances) {
      std::size_t n = 1 + instances % 5;
      auto m = oracle::random_mdp(rng, n, 2);
      auto target = oracle::random_subset(rng, n, 0.3);
      auto sol = max_reachability(m, target, dead_states(m, target));
      auto expect = oracle::max_reachability(m, target);
      for (StateIndex s = 0; s < n; ++s) worst = std::max(worst, std::abs(sol.values[s] - expect[s]));
    }
    report(7, worst <= kOracleTolerance, fmt("%.0f instances max error %.3g", instances, worst));
  });

  guarded(8, [&] {
    std::vector<std::pair<const Model*, std::string>> cases = {
        {&casestudy, *casestudy.formula}, {&casestudy, "false"},          {&casestudy, "true"},
        {&casestudy, "F event9"},        {&casestudy, "G F pickup"},      {&casestudy, "F G !pickup"},
        {&coinflip, *coinflip.formula},  {&coinflip, "F bad"},            {&coinflip, "G F !bad"}};
    double worst = 0.0;
    bool boundary = true, monotone = true;
    for (const auto& [model, formula] : cases) {
      Instance in(*model, formula);
      const auto& sol = in.result.solution;
      worst = std::max(worst, bellman_residual(in.product.graph, sol));
      monotone = monotone && sol.monotone;
      for (StateIndex s = 0; s < in.product.state_count(); ++s) {
        if (sol.target[s] && sol.values[s] != 1.0) boundary = false;
        if (sol.dead[s] && sol.values[s] != 0.0) boundary = false;
      }
    }
    report(8, worst < kResidualTolerance && boundary && monotone,
           fmt("%.0f instances residual %.3g", double(cases.size()), worst) + (boundary ? " boundary ok" : " boundary broken") +
               (monotone ? " monotone" : " not monotone"));
  });

  guarded(9, [&] {
    constexpr std::size_t n = 5000;
    std::string detail;
    bool ok = true;
    auto test = [&](const Model& model, std::size_t horizon, const char* name) {
      Instance in(model, *model.formula);
      auto e = Simulator(in.model, in.mdp, in.dra, in.product, in.result.policy).estimate(n, horizon, 1000);
      double p = binomial_p_value(e.successes, n, in.result.probability);
      ok = ok && p >= kSignificance;
      detail += std::string(name) + fmt(" p*=%.6f k=%.0f p-value=%.4f ", in.result.probability, double(e.successes), p);
    };
    test(casestudy, 1000, "casestudy");
    test(coinflip, 200, "coinflip");
    report(9, ok, detail);
  });

  std::printf("%s\n", failures == 0 ? "all criteria PASS" : "some criteria FAIL");
  return failures == 0 ? 0 : 1;
}
