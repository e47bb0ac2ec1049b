#pragma once

// Monte-Carlo execution of a control strategy in the environment.
//
// Random numbers come from std::mt19937_64, whose output sequence is fixed
// by the standard, and are turned into doubles by taking the top 53 bits,
// so traces are identical on every platform. Episode k of a batch seeded
// with S uses seed S + k.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "ltlmdp/env.hpp"
#include "ltlmdp/error.hpp"
#include "ltlmdp/mdp.hpp"
#include "ltlmdp/product.hpp"
#include "ltlmdp/synthesis.hpp"

namespace ltlmdp {

inline constexpr const char* kRngName = "mt19937_64";

struct TraceStep {
  std::size_t t;
  VertexIndex vertex;
  PropSet observation;
  ActionIndex action;
  StateIndex product_state;
  Region region;
};

struct Trace {
  std::uint64_t seed = 0;
  std::vector<TraceStep> steps;
  std::optional<std::size_t> entered_amec;  // first step in an accepting MEC
  std::vector<PropSet> word;                // observation at every step
};

struct SimulateOptions {
  std::size_t horizon = 100;
  /// End the episode once it enters an accepting MEC or a dead state.
  bool stop_when_decided = false;
};

struct Estimate {
  std::size_t episodes = 0;
  std::size_t successes = 0;
  double fraction = 0.0;
  double half_width = 0.0;  // Wilson 95% interval
  double lower = 0.0;
  double upper = 0.0;
};

/// Wilson score interval at 95% confidence.
inline Estimate wilson_estimate(std::size_t successes, std::size_t n) {
  constexpr double z = 1.959963984540054;
  Estimate e;
  e.episodes = n;
  e.successes = successes;
  if (n == 0) return e;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double denom = 1.0 + z * z / nn;
  const double center = (p + z * z / (2.0 * nn)) / denom;
  e.fraction = p;
  e.half_width = z / denom * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn));
  e.lower = std::max(0.0, center - e.half_width);
  e.upper = std::min(1.0, center + e.half_width);
  return e;
}

/// Two-sided exact binomial test: probability, under Binomial(n, p), of an
/// outcome no more likely than k.
inline double binomial_p_value(std::size_t k, std::size_t n, double p) {
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
  const double observed = boost::math::pdf(dist, static_cast<double>(k));
  double total = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    double q = boost::math::pdf(dist, static_cast<double>(i));
    if (q <= observed * (1.0 + 1e-7)) total += q;
  }
  return std::min(1.0, total);
}

/// Samples trajectories of a model under a synthesized strategy. Holds
/// references; the model, MDP, automaton, product and policy must outlive
/// it. Safe to share between threads.
class Simulator {
 public:
  Simulator(const Model& model, const LabeledMdp& mdp, const RabinAutomaton& dra, const ProductMdp& product,
            const ProductPolicy& policy)
      : model_(&model), mdp_(&mdp), dra_(&dra), product_(&product), policy_(&policy) {
    for (VertexIndex v = 0; v < model.environment.vertex_count(); ++v) {
      std::vector<ObservationSet> obs;
      for (auto s = mdp.vertex_offset[v]; s < mdp.vertex_offset[v + 1]; ++s) {
        obs.push_back({v, mdp.states[s].observation,
                       observation_probability(model.observation, v, mdp.states[s].observation)});
      }
      observations_.push_back(std::move(obs));
    }
  }

  ControlStrategy strategy() const { return ControlStrategy(*mdp_, *dra_, *product_, *policy_); }

  Trace simulate(std::uint64_t seed, const SimulateOptions& options) const {
    if (options.horizon == 0) throw InputError("horizon must be at least 1");
    std::mt19937_64 rng(seed);
    auto strategy = this->strategy();
    Trace trace;
    trace.seed = seed;
    VertexIndex v = model_->environment.initial;
    PropSet z = sample_observation(v, rng);
    for (std::size_t t = 0; t < options.horizon; ++t) {
      ActionIndex u = strategy.next(v, z);
      StateIndex p = strategy.product_state();
      Region r = policy_->region[p];
      trace.steps.push_back({t, v, z, u, p, r});
      trace.word.push_back(z);
      if (r == Region::Accepting && !trace.entered_amec) trace.entered_amec = t;
      if (options.stop_when_decided && (r != Region::Transient)) break;
      v = sample_successor(v, u, rng);
      z = sample_observation(v, rng);
    }
    return trace;
  }

  /// Fraction of episodes that enter an accepting MEC within the horizon.
  /// Episodes are split across `threads` workers; the result does not
  /// depend on the split.
  Estimate estimate(std::size_t episodes, std::size_t horizon, std::uint64_t seed, unsigned threads = 1) const {
    if (episodes == 0) throw InputError("at least one episode is required");
    std::vector<char> hit(episodes, 0);
    SimulateOptions options{horizon, true};
    auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) hit[k] = simulate(seed + k, options).entered_amec.has_value();
    };
    threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(episodes)));
    if (threads == 1) {
      work(0, episodes);
    } else {
      std::vector<std::thread> pool;
      std::size_t chunk = (episodes + threads - 1) / threads;
      for (std::size_t b = 0; b < episodes; b += chunk) pool.emplace_back(work, b, std::min(episodes, b + chunk));
      for (auto& th : pool) th.join();
    }
    return wilson_estimate(static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1)), episodes);
  }

  /// One line per step: `t vertex {obs} action (v,Z,q) region`.
  std::string format(const Trace& trace) const {
    std::ostringstream out;
    out << "# rng " << kRngName << " seed " << trace.seed << "\n";
    for (const auto& st : trace.steps) {
      const auto& bm = product_->back_map[st.product_state];
      std::string tuple = mdp_->format_state(bm.mdp_state);
      tuple.insert(tuple.size() - 1, "," + std::to_string(bm.automaton_state));
      std::string obs = "{";
      for (auto p : st.observation.members()) obs += (obs.size() > 1 ? "," : "") + mdp_->propositions[p];
      obs += "}";
      out << st.t << ' ' << mdp_->vertex_names[st.vertex] << ' ' << obs << ' ' << mdp_->action_names[st.action]
          << ' ' << tuple << ' ' << region_name(*policy_, st.product_state) << "\n";
    }
    return out.str();
  }

 private:
  static double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

  PropSet sample_observation(VertexIndex v, std::mt19937_64& rng) const {
    const auto& obs = observations_[v];
    double x = uniform(rng);
    for (const auto& o : obs) {
      if (x < o.probability) return o.observed;
      x -= o.probability;
    }
    return obs.back().observed;
  }

  VertexIndex sample_successor(VertexIndex v, ActionIndex u, std::mt19937_64& rng) const {
    const auto& row = model_->motion.outcomes(v, u);
    double x = uniform(rng);
    for (const auto& o : row) {
      if (x < o.probability) return o.target;
      x -= o.probability;
    }
    return row.back().target;
  }

  const Model* model_;
  const LabeledMdp* mdp_;
  const RabinAutomaton* dra_;
  const ProductMdp* product_;
  const ProductPolicy* policy_;
  std::vector<std::vector<ObservationSet>> observations_;
};

}  // namespace ltlmdp
