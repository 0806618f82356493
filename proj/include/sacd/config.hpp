#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sacd/agent.hpp"
#include "sacd/envs.hpp"

namespace sacd {

/// Environment selector: a string id plus its parameter block. Exactly one
/// of the spec structs is active, per `id`.
struct EnvConfig {
    std::string id;  // "chain" | "gridworld" | "random_mdp"
    SparseChainSpec chain;
    GridworldSpec gridworld;
    RandomMdpSpec random_mdp;

    BuiltEnv build() const;
    void validate() const;
};

/// One experiment: environment, agent, cadences, output location and seeds.
struct RunConfig {
    EnvConfig env;
    AgentConfig agent;
    long total_env_steps = 0;
    long eval_interval = 2500;
    int eval_episodes = 10;
    long bias_interval = 0;        // 0 disables bias diagnostics
    std::string bias_weighting = "visitation";  // or "uniform" over non-terminal states
    long similarity_interval = 0;  // 0 disables similarity diagnostics
    long similarity_rollout_steps = 2000;
    long visitation_rollout_steps = 10000;
    std::string output_dir;
    std::vector<std::uint64_t> seeds;

    void validate() const;
};

/// Parses and validates; a ConfigError names the first invalid field by its
/// dotted path.
RunConfig parse_run_config(const nlohmann::json& j);

/// Canonical (defaults materialized, keys sorted) echo of a config.
nlohmann::json run_config_to_json(const RunConfig& config);

/// Parses and re-serializes, materializing every default so that any schema
/// path is addressable by overrides and sweep grids.
nlohmann::json canonicalize_run_config(const nlohmann::json& doc);

/// FNV-1a hash of the canonical serialization, as fixed-width hex.
std::string config_hash(const RunConfig& config);

/// Sets `doc` at a dotted path like "agent.variant.q_clip". Every path
/// component must already exist (null values count as existing).
void json_set_path(nlohmann::json& doc, const std::string& path, const nlohmann::json& value);

/// Applies "key=value" overrides (values parsed as JSON, bare words as
/// strings) to a config document.
void apply_overrides(nlohmann::json& doc, const std::vector<std::string>& overrides);

}  // namespace sacd
