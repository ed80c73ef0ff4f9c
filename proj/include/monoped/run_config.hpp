#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "monoped/codesign.hpp"
#include "monoped/stage1.hpp"

namespace monoped {

// Aggregated, file-loadable configuration for every pipeline stage. Loading
// deep-merges the user's JSON onto the built-in defaults, so a config file
// only needs the fields it changes; unknown or ill-typed keys are rejected
// with their full field path.
struct RunConfig {
  Stage1Config stage1;
  SimConfig sim;
  DecodeConfig decode;  // decode.materials always mirrors stage1.materials
  DesignBounds bounds;
  CostConfig cost;

  std::string study_case = "c";  // nominal | a | b | c | custom
  // For the custom case: design-variable name -> pinned value. Ordered map so
  // the canonical dump (and therefore the config hash) is stable.
  std::map<std::string, double> custom_frozen;
  int population = 16;
  int max_generations = 100;
  double sigma0 = 0.3;

  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int jobs = 0;

  CaseSpec study() const;  // throws on an unknown case or variable name
  CodesignConfig codesign_config() const;
  void validate() const;
};

RunConfig default_run_config();

// Canonical full dump: every field, fixed key order, suitable for hashing.
nlohmann::ordered_json run_config_to_json(const RunConfig& config);

// Deep-merge onto defaults + strict validation. Throws std::invalid_argument
// with a field path on unknown keys, type mismatches, or invariant failures.
RunConfig run_config_from_json(const nlohmann::ordered_json& user);
RunConfig load_run_config(const std::string& path);  // std::runtime_error on I/O

std::uint64_t fnv1a64(std::string_view bytes);

// Hash of the full semantic configuration (seed, out_dir, and jobs excluded:
// they change where results land or how fast they arrive, not what they are).
std::uint64_t config_hash(const RunConfig& config);

// Hash of just the catalog-determining subtree; lets the pipeline skip the
// stage-1 sweep when an existing catalog file was built from the same inputs.
std::uint64_t stage1_hash(const RunConfig& config);

}  // namespace monoped
