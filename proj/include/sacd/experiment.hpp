#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sacd/config.hpp"
#include "sacd/metrics.hpp"

namespace sacd {

struct RunArtifacts {
    std::uint64_t seed = 0;
    std::filesystem::path dir;
    std::optional<double> final_score_mean;
};

/// Trains one seed, writing metrics.csv, manifest.json and a final
/// checkpoint under `dir`.
RunArtifacts run_single_seed(const RunConfig& config, std::uint64_t seed,
                             const std::filesystem::path& dir);

/// Runs every seed of the config sequentially under
/// <output_dir>/seed_<seed>/.
std::vector<RunArtifacts> run_experiment(const RunConfig& config);

/// One sweep cell: grid values applied to the base config.
struct SweepCell {
    int index = 0;
    std::map<std::string, nlohmann::json> assignment;
    double final_score_mean = 0.0;
    double final_score_std = 0.0;  // sample std across seeds
    int num_seeds = 0;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::filesystem::path summary_csv;
};

/// Cartesian-product sweep. `grid` maps dotted config paths to value lists;
/// unknown paths are rejected. Each cell runs all seeds of the base config;
/// the summary CSV holds final mean +- std score per cell.
SweepResult sweep(const nlohmann::json& base_config,
                  const std::map<std::string, std::vector<nlohmann::json>>& grid,
                  const std::filesystem::path& output_dir);

struct ReportEnvRow {
    std::string env_id;
    int num_runs = 0;
    double final_score_mean = 0.0;
    double final_score_std = 0.0;
    std::optional<double> normalized;
};

struct ReportResult {
    std::vector<ReportEnvRow> per_env;
    std::optional<double> normalized_mean;
    std::optional<double> normalized_median;
    std::string markdown;
    std::string csv;
};

/// Aggregates finished run directories: groups by environment, aligns score
/// traces on step, and (when a baselines document {env: {random, reference}}
/// is supplied) computes normalized scores with mean/median across
/// environments.
ReportResult report(const std::vector<std::filesystem::path>& run_dirs,
                    const std::optional<nlohmann::json>& baselines);

}  // namespace sacd
