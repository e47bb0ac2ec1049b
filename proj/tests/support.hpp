#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "ltlmdp/automata.hpp"
#include "ltlmdp/env.hpp"

namespace support {

inline std::string model_path(const std::string& name) { return std::string(LTLMDP_MODELS_DIR) + "/" + name; }

inline std::string read(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

// One state, no propositions, accepting every word.
inline ltlmdp::RabinAutomaton universal_dra() {
  ltlmdp::RabinAutomaton d;
  d.alphabet = {ltlmdp::PropSet{}};
  d.delta = {{0}};
  d.pairs = {{{}, {0}}};
  return d;
}

inline ltlmdp::Model load(const std::string& name) { return ltlmdp::load_environment_file(model_path(name)); }

// v1 -u-> v2 (and back); v2 observes `a` with probability p.
inline std::string chain_model(double p) {
  return R"({
    "vertices": [
      {"id": "v1", "edges": ["v2"], "enabled": ["u"]},
      {"id": "v2", "edges": ["v1"], "enabled": ["u"], "obs": {"a": )" +
         std::to_string(p) + R"(}}
    ],
    "actions": ["u"],
    "propositions": ["a"],
    "initial": "v1",
    "motion": [
      {"from": "v1", "action": "u", "to": "v2", "prob": 1.0},
      {"from": "v2", "action": "u", "to": "v1", "prob": 1.0}
    ]
  })";
}

}  // namespace support
