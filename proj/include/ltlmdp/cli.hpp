#pragma once

// Command-line front end: one subcommand per pipeline stage.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ltlmdp/automata.hpp"
#include "ltlmdp/env.hpp"
#include "ltlmdp/error.hpp"
#include "ltlmdp/hoa.hpp"
#include "ltlmdp/ltl.hpp"
#include "ltlmdp/mdp.hpp"
#include "ltlmdp/product.hpp"
#include "ltlmdp/sim.hpp"
#include "ltlmdp/synthesis.hpp"

namespace ltlmdp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitResource = 2;

/// Everything a subcommand may need, filled from flags and environment.
struct RunConfig {
  std::string model_path;
  std::string formula;
  std::string hoa_in;
  std::string hoa_out;
  std::string dump_path;
  std::string policy_out;
  std::string traces_out;
  bool json = false;
  bool prune = true;
  bool full_alphabet = false;
  double epsilon = SolveOptions{}.epsilon;
  double tolerance = kDefaultProbabilityTolerance;
  std::size_t episodes = 1000;
  std::size_t horizon = 200;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

namespace detail {

class UsageError : public Error {
 public:
  using Error::Error;
};

inline double env_double(const char* name, double fallback) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return fallback;
  try {
    std::size_t used = 0;
    double v = std::stod(raw, &used);
    if (used != std::string(raw).size() || !(v > 0.0)) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string(name) + " must be a positive number, got '" + raw + "'");
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

// Attaches the file name to parse errors.
inline Model load_model(const RunConfig& cfg) {
  if (cfg.model_path.empty()) throw UsageError("--model is required");
  try {
    return load_environment(read_file(cfg.model_path), cfg.tolerance);
  } catch (const ParseError& e) {
    throw ParseError(cfg.model_path + ": " + e.what());
  }
}

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// The shared pipeline state; stages run on demand.
struct Pipeline {
  explicit Pipeline(const RunConfig& config) : cfg(config) {}

  const RunConfig& cfg;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::map<std::string, double> timings;
  std::optional<Model> model;
  std::optional<LabeledMdp> mdp;
  std::optional<RabinAutomaton> dra;
  std::optional<ProductMdp> product;
  std::optional<Synthesis> synthesis;

  void load() {
    auto t = Clock::now();
    model = load_model(cfg);
    validate(*model, cfg.tolerance);
    timings["load"] = elapsed_ms(t);
  }

  void build() {
    load();
    auto t = Clock::now();
    mdp = build_mdp(*model);
    check_stochastic(mdp->graph, cfg.tolerance);
    timings["build_mdp"] = elapsed_ms(t);
    summary["mdp_states"] = mdp->state_count();
  }

  // Formula from --formula, else the model's own; HOA from --hoa-in.
  void automaton() {
    auto t = Clock::now();
    if (!cfg.formula.empty() && !cfg.hoa_in.empty()) throw UsageError("give either --formula or --hoa-in, not both");
    if (!cfg.hoa_in.empty()) {
      try {
        dra = import_hoa(read_file(cfg.hoa_in));
      } catch (const ParseError& e) {
        throw ParseError(cfg.hoa_in + ": " + e.what());
      }
    } else {
      std::string text = cfg.formula;
      if (text.empty() && model && model->formula) text = *model->formula;
      if (text.empty()) throw UsageError("no formula: give --formula, --hoa-in, or a model with a formula");
      ltl::Formula f;
      try {
        f = ltl::parse(text);
      } catch (const ParseError& e) {
        throw ParseError(std::string("formula: ") + e.what());
      }
      summary["formula"] = ltl::to_string(f);
      TranslateOptions options;
      if (mdp && !cfg.full_alphabet) options.alphabet = realizable_symbols(*mdp, ltl::atoms(f));
      dra = ltl_to_dra(f, options);
    }
    timings["translate"] = elapsed_ms(t);
    summary["dra_states"] = dra->state_count();
    summary["dra_pairs"] = dra->pairs.size();
    summary["dra_transitions"] = dra->transition_count();
  }

  void make_product() {
    build();
    automaton();
    auto t = Clock::now();
    product = build_product(*mdp, *dra, {cfg.prune});
    timings["product"] = elapsed_ms(t);
    summary["product_states"] = product->state_count();
  }

  void synthesize() {
    make_product();
    auto t = Clock::now();
    SolveOptions options;
    options.epsilon = cfg.epsilon;
    synthesis = ltlmdp::synthesize(*product, options);
    timings["synthesize"] = elapsed_ms(t);
    summary["accepting_mecs"] = synthesis->amecs.components.size();
    summary["target_states"] = static_cast<std::size_t>(
        std::count(synthesis->amecs.target.begin(), synthesis->amecs.target.end(), true));
    summary["iterations"] = synthesis->solution.iterations;
    summary["max_probability"] = synthesis->probability;
  }
};

inline void emit(std::ostream& out, const Pipeline& p, const std::vector<std::string>& lines) {
  if (p.cfg.json) {
    auto j = p.summary;
    j["timings_ms"] = p.timings;
    out << j.dump(2) << "\n";
  } else {
    for (const auto& l : lines) out << l << "\n";
  }
}

}  // namespace detail

/// Runs one invocation. `args` excludes the program name. Returns the exit
/// status: 0 on success, 1 on bad input, 2 when a size or iteration limit
/// is hit.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Optimal control strategies for LTL missions in probabilistic environments", "ltlmdp"};
  app.require_subcommand(1);
  app.add_flag("--json", cfg.json, "Print a machine-readable summary instead of text");
  app.add_option("--epsilon", cfg.epsilon, "Value iteration stopping threshold (env LTLMDP_VI_EPSILON)")
      ->check(CLI::PositiveNumber);
  app.add_option("--tolerance", cfg.tolerance, "Probability sum tolerance (env LTLMDP_PROB_TOLERANCE)")
      ->check(CLI::PositiveNumber);

  auto model_opt = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model_path, "Environment model (JSON)")->required();
  };
  auto automaton_opts = [&](CLI::App* sub) {
    sub->add_option("--formula", cfg.formula, "LTL formula (defaults to the model's formula)");
    sub->add_option("--hoa-in", cfg.hoa_in, "Use this HOA Rabin automaton instead of translating");
    sub->add_flag("--full-alphabet", cfg.full_alphabet,
                  "Translate over all proposition sets instead of the ones the model can produce");
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check a model document");
  model_opt(validate_cmd);

  auto* build_cmd = app.add_subcommand("build-mdp", "Build the labeled MDP");
  model_opt(build_cmd);
  build_cmd->add_option("--dump", cfg.dump_path, "Write the MDP listing to this file ('-' for stdout)");

  auto* translate_cmd = app.add_subcommand("translate", "Translate a formula to a Rabin automaton");
  translate_cmd->add_option("--model", cfg.model_path, "Restrict the alphabet to what this model can produce");
  automaton_opts(translate_cmd);
  translate_cmd->add_option("--hoa-out", cfg.hoa_out, "Write the automaton in HOA format");

  auto* product_cmd = app.add_subcommand("product", "Build the product MDP and print its size");
  model_opt(product_cmd);
  automaton_opts(product_cmd);
  product_cmd->add_flag("--stats", "Print state and pair counts (default)");
  bool no_prune = false;
  product_cmd->add_flag("--no-prune", no_prune, "Keep unreachable product states");

  auto* synth_cmd = app.add_subcommand("synthesize", "Compute the optimal strategy and its probability");
  model_opt(synth_cmd);
  automaton_opts(synth_cmd);
  synth_cmd->add_option("--out", cfg.policy_out, "Write the policy table to this file");
  synth_cmd->add_flag("--no-prune", no_prune, "Keep unreachable product states");

  auto* sim_cmd = app.add_subcommand(
      "simulate",
      "Run the optimal strategy and count episodes that reach an accepting end component; reaching one "
      "is the finite-horizon stand-in for satisfying the formula");
  model_opt(sim_cmd);
  automaton_opts(sim_cmd);
  sim_cmd->add_option("--episodes", cfg.episodes, "Number of episodes")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--horizon", cfg.horizon, "Steps per episode")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", cfg.seed, "Base seed; episode k uses seed + k");
  sim_cmd->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--traces-out", cfg.traces_out, "Write one trace file per episode into this directory");

  try {
    cfg.epsilon = detail::env_double("LTLMDP_VI_EPSILON", cfg.epsilon);
    cfg.tolerance = detail::env_double("LTLMDP_PROB_TOLERANCE", cfg.tolerance);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const detail::UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  cfg.prune = !no_prune;

  detail::Pipeline p(cfg);
  try {
    if (validate_cmd->parsed()) {
      p.load();
      const auto& m = *p.model;
      p.summary["vertices"] = m.environment.vertex_count();
      p.summary["actions"] = m.motion.actions.size();
      p.summary["propositions"] = m.environment.proposition_count();
      detail::emit(out, p,
                   {"valid " + std::to_string(m.environment.vertex_count()) + " vertices " +
                    std::to_string(m.motion.actions.size()) + " actions " +
                    std::to_string(m.environment.proposition_count()) + " propositions"});
    } else if (build_cmd->parsed()) {
      p.build();
      std::string listing = dump(*p.mdp);
      if (cfg.dump_path == "-") {
        out << listing;
      } else {
        if (!cfg.dump_path.empty()) detail::write_file(cfg.dump_path, listing);
        detail::emit(out, p, {"states " + std::to_string(p.mdp->state_count())});
      }
    } else if (translate_cmd->parsed()) {
      if (!cfg.model_path.empty()) p.build();
      p.automaton();
      if (!cfg.hoa_out.empty()) detail::write_file(cfg.hoa_out, export_hoa(*p.dra));
      detail::emit(out, p,
                   {"states " + std::to_string(p.dra->state_count()),
                    "pairs " + std::to_string(p.dra->pairs.size()),
                    "alphabet " + std::to_string(p.dra->alphabet.size()),
                    "transitions " + std::to_string(p.dra->transition_count())});
    } else if (product_cmd->parsed()) {
      p.make_product();
      auto& pairs = p.summary["pairs"] = nlohmann::ordered_json::array();
      for (const auto& pair : p.product->pairs) pairs.push_back({{"L", pair.fin_count()}, {"K", pair.inf_count()}});
      if (cfg.json) {
        detail::emit(out, p, {});
      } else {
        out << stats(*p.product);
      }
    } else if (synth_cmd->parsed()) {
      p.synthesize();
      if (!cfg.policy_out.empty()) {
        detail::write_file(cfg.policy_out, dump_policy(p.synthesis->policy, *p.product, *p.mdp));
      }
      detail::emit(out, p,
                   {"mdp_states " + std::to_string(p.mdp->state_count()),
                    "dra_states " + std::to_string(p.dra->state_count()),
                    "product_states " + std::to_string(p.product->state_count()),
                    "accepting_mecs " + std::to_string(p.synthesis->amecs.components.size()),
                    "max_probability " + ltlmdp::detail::fixed6(p.synthesis->probability)});
    } else if (sim_cmd->parsed()) {
      p.synthesize();
      Simulator sim(*p.model, *p.mdp, *p.dra, *p.product, p.synthesis->policy);
      auto t = detail::Clock::now();
      Estimate e;
      if (cfg.traces_out.empty()) {
        e = sim.estimate(cfg.episodes, cfg.horizon, cfg.seed, cfg.threads);
      } else {
        std::filesystem::create_directories(cfg.traces_out);
        std::size_t hits = 0;
        for (std::size_t k = 0; k < cfg.episodes; ++k) {
          auto trace = sim.simulate(cfg.seed + k, {cfg.horizon, false});
          if (trace.entered_amec) ++hits;
          auto path = std::filesystem::path(cfg.traces_out) / ("episode_" + std::to_string(k) + ".txt");
          detail::write_file(path.string(), sim.format(trace));
        }
        e = wilson_estimate(hits, cfg.episodes);
      }
      p.timings["simulate"] = detail::elapsed_ms(t);
      p.summary["rng"] = kRngName;
      p.summary["seed"] = cfg.seed;
      p.summary["episodes"] = e.episodes;
      p.summary["entered_amec"] = e.successes;
      p.summary["fraction"] = e.fraction;
      p.summary["half_width"] = e.half_width;
      detail::emit(out, p,
                   {"rng " + std::string(kRngName) + " seed " + std::to_string(cfg.seed),
                    "max_probability " + ltlmdp::detail::fixed6(p.synthesis->probability),
                    "episodes " + std::to_string(e.episodes), "entered_amec " + std::to_string(e.successes),
                    "fraction " + ltlmdp::detail::fixed6(e.fraction),
                    "half_width " + ltlmdp::detail::fixed6(e.half_width)});
    }
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << "\n";
    return kExitResource;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << "\n";
    return kExitResource;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace ltlmdp::cli
