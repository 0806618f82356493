#include "sacd/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sacd/agent.hpp"
#include "sacd/diagnostics.hpp"
#include "sacd/errors.hpp"
#include "sacd/version.hpp"

namespace sacd {

using nlohmann::json;

namespace {

PolicyFn mlp_policy_fn(const ParamSet& params, const MlpSpec& spec) {
    ParamSet copy = params;
    return [copy, spec](const Vector& obs) mutable { return forward_policy(copy, spec, obs); };
}

bool crossed(long before, long after, long interval) {
    return interval > 0 && after / interval > before / interval;
}

void save_agent_checkpoint(const Agent& agent, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_checkpoint(agent.policy_params(), agent.policy_spec().to_json(), dir / "policy");
    save_checkpoint(agent.critic_params(0), agent.critic_spec().to_json(), dir / "critic1");
    save_checkpoint(agent.critic_params(1), agent.critic_spec().to_json(), dir / "critic2");
    save_checkpoint(agent.target_params(0), agent.critic_spec().to_json(), dir / "target1");
    save_checkpoint(agent.target_params(1), agent.critic_spec().to_json(), dir / "target2");
    json meta;
    meta["alpha"] = agent.alpha();
    meta["env_steps"] = agent.env_steps();
    meta["train_steps"] = agent.train_steps();
    std::ofstream out(dir / "meta.json");
    if (!out) throw IoError("cannot write checkpoint meta");
    out << meta.dump(2) << "\n";
}

}  // namespace

RunArtifacts run_single_seed(const RunConfig& config, std::uint64_t seed,
                             const std::filesystem::path& dir) {
    auto t_start = std::chrono::steady_clock::now();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string());

    BuiltEnv train = config.env.build();
    BuiltEnv eval_env = config.env.build();
    BuiltEnv diag_env = config.env.build();

    AgentConfig agent_config = config.agent;
    agent_config.seed = seed;
    Agent agent(agent_config, train.env->observation_dim(), train.env->num_actions());

    MetricTrace trace;
    const bool tabular = train.env->observation_dim() == train.mdp.num_states;
    std::optional<Vector> prev_similarity_hist;
    std::uint64_t eval_counter = 0, bias_counter = 0, sim_counter = 0;
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    auto run_eval = [&](long step) {
        EvalResult r =
            agent.evaluate(*eval_env.env, config.eval_episodes, derive_seed(seed, "eval", eval_counter++));
        MetricRow row;
        row.step = step;
        row.wall_time = elapsed();
        row.score_mean = r.mean;
        row.score_std = r.std_dev;
        trace.add(row);
    };

    long env_steps = 0;
    while (env_steps < config.total_env_steps) {
        long chunk = std::min<long>(config.agent.train_interval, config.total_env_steps - env_steps);
        agent.collect(*train.env, chunk);
        long prev_steps = env_steps;
        env_steps += chunk;

        if (agent.ready_to_train()) {
            StepMetrics m = agent.train_step();
            MetricRow row;
            row.step = env_steps;
            row.wall_time = elapsed();
            row.entropy_mean = m.batch_entropy_mean;
            row.alpha = m.alpha;
            row.critic_loss1 = m.critic_loss1;
            row.critic_loss2 = m.critic_loss2;
            row.policy_loss = m.policy_loss;
            row.y_mean = m.y_mean;
            trace.add(row);
        }

        if (crossed(prev_steps, env_steps, config.eval_interval)) run_eval(env_steps);

        if (tabular && crossed(prev_steps, env_steps, config.bias_interval)) {
            TabularPolicy policy =
                extract_tabular_policy(agent.policy_params(), agent.policy_spec(), train.mdp.num_states);
            Vector visitation;
            if (config.bias_weighting == "uniform") {
                visitation = uniform_visitation(train.mdp);
            } else {
                PolicyFn fn = mlp_policy_fn(agent.policy_params(), agent.policy_spec());
                visitation =
                    estimate_visitation(*diag_env.env, fn, config.visitation_rollout_steps,
                                        derive_seed(seed, "visitation", bias_counter));
            }
            BiasReport bias =
                measure_bias(agent.critic_params(0), agent.critic_params(1), agent.critic_spec(),
                             policy, config.agent.variant.target_rule, train.mdp, agent.alpha(),
                             visitation);
            ++bias_counter;
            MetricRow row;
            row.step = env_steps;
            row.wall_time = elapsed();
            row.q_estimate_mean = bias.q_estimate_mean;
            row.q_true_mean = bias.q_true_mean;
            row.bias_mean = bias.mean_bias;
            trace.add(row);
        }

        if (tabular && crossed(prev_steps, env_steps, config.similarity_interval)) {
            PolicyFn fn = mlp_policy_fn(agent.policy_params(), agent.policy_spec());
            Vector hist = estimate_visitation(*diag_env.env, fn, config.similarity_rollout_steps,
                                              derive_seed(seed, "similarity", sim_counter++));
            if (prev_similarity_hist) {
                MetricRow row;
                row.step = env_steps;
                row.wall_time = elapsed();
                row.state_cosine_similarity = state_distribution_similarity(*prev_similarity_hist, hist);
                trace.add(row);
            }
            prev_similarity_hist = hist;
        }
    }
    // Always close with an evaluation at the final step.
    if (config.total_env_steps > 0 && config.total_env_steps % config.eval_interval != 0)
        run_eval(config.total_env_steps);

    trace.write_csv(dir / "metrics.csv");
    save_agent_checkpoint(agent, dir / "checkpoint");

    json manifest;
    manifest["format_version"] = kArtifactFormatVersion;
    manifest["version"] = kVersion;
    manifest["env_id"] = config.env.id;
    manifest["seed"] = seed;
    manifest["config"] = run_config_to_json(config);
    manifest["config_hash"] = config_hash(config);
    manifest["duration_seconds"] = elapsed();
    manifest["rows"] = trace.rows().size();
    auto final_score = trace.final_score_mean();
    manifest["final_score_mean"] = final_score ? json(*final_score) : json(nullptr);
    std::ofstream mf(dir / "manifest.json");
    if (!mf) throw IoError("cannot write manifest in " + dir.string());
    mf << manifest.dump(2) << "\n";

    RunArtifacts out;
    out.seed = seed;
    out.dir = dir;
    out.final_score_mean = final_score;
    return out;
}

std::vector<RunArtifacts> run_experiment(const RunConfig& config) {
    config.validate();
    std::vector<RunArtifacts> out;
    for (std::uint64_t seed : config.seeds) {
        std::filesystem::path dir =
            std::filesystem::path(config.output_dir) / ("seed_" + std::to_string(seed));
        out.push_back(run_single_seed(config, seed, dir));
    }
    return out;
}

SweepResult sweep(const json& base_config,
                  const std::map<std::string, std::vector<json>>& grid,
                  const std::filesystem::path& output_dir) {
    // Validate grid paths against the canonicalized base config so that every
    // key, including ones left at defaults, is addressable.
    RunConfig base = parse_run_config(base_config);
    json canonical = run_config_to_json(base);
    for (const auto& [path, values] : grid) {
        if (values.empty()) throw ConfigError("grid path '" + path + "' has no values");
        json probe = canonical;
        json_set_path(probe, path, values.front());
    }

    std::vector<std::string> keys;
    for (const auto& [path, values] : grid) keys.push_back(path);

    std::vector<std::map<std::string, json>> cells{{}};
    for (const std::string& key : keys) {
        std::vector<std::map<std::string, json>> next;
        for (const auto& partial : cells) {
            for (const json& v : grid.at(key)) {
                auto cell = partial;
                cell[key] = v;
                next.push_back(std::move(cell));
            }
        }
        cells = std::move(next);
    }

    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (ec) throw IoError("cannot create sweep directory " + output_dir.string());

    SweepResult result;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        json cell_config = canonical;
        for (const auto& [path, value] : cells[i]) json_set_path(cell_config, path, value);
        char cell_name[32];
        std::snprintf(cell_name, sizeof(cell_name), "cell_%03zu", i);
        std::filesystem::path cell_dir = output_dir / cell_name;
        cell_config["output_dir"] = cell_dir.string();
        RunConfig config = parse_run_config(cell_config);

        std::vector<RunArtifacts> runs = run_experiment(config);
        double mean = 0.0;
        int n = 0;
        for (const auto& r : runs)
            if (r.final_score_mean) {
                mean += *r.final_score_mean;
                ++n;
            }
        if (n == 0) throw ConfigError("sweep cell " + std::string(cell_name) + " produced no scores");
        mean /= n;
        double var = 0.0;
        for (const auto& r : runs)
            if (r.final_score_mean) var += (*r.final_score_mean - mean) * (*r.final_score_mean - mean);
        double stdev = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;

        SweepCell cell;
        cell.index = static_cast<int>(i);
        cell.assignment = cells[i];
        cell.final_score_mean = mean;
        cell.final_score_std = stdev;
        cell.num_seeds = n;
        result.cells.push_back(std::move(cell));
    }

    result.summary_csv = output_dir / "summary.csv";
    std::ofstream out(result.summary_csv);
    if (!out) throw IoError("cannot write " + result.summary_csv.string());
    out << "cell";
    for (const std::string& key : keys) out << ',' << key;
    out << ",num_seeds,final_score_mean,final_score_std\n";
    for (const SweepCell& cell : result.cells) {
        out << cell.index;
        for (const std::string& key : keys) out << ',' << cell.assignment.at(key).dump();
        out << ',' << cell.num_seeds << ',' << format_double(cell.final_score_mean) << ','
            << format_double(cell.final_score_std) << "\n";
    }
    return result;
}

namespace {

struct LoadedRun {
    std::string env_id;
    std::uint64_t seed;
    MetricTrace trace;
};

LoadedRun load_run(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw IoError("missing manifest in " + dir.string());
    json manifest;
    try {
        mf >> manifest;
    } catch (const json::exception& e) {
        throw IoError("malformed manifest in " + dir.string() + ": " + e.what());
    }
    LoadedRun run;
    run.env_id = manifest.at("env_id").get<std::string>();
    run.seed = manifest.at("seed").get<std::uint64_t>();
    run.trace = MetricTrace::read_csv(dir / "metrics.csv");
    return run;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ReportResult report(const std::vector<std::filesystem::path>& run_dirs,
                    const std::optional<json>& baselines) {
    if (run_dirs.empty()) throw ConfigError("report: no run directories given");
    std::map<std::string, std::vector<LoadedRun>> by_env;
    for (const auto& dir : run_dirs) {
        LoadedRun run = load_run(dir);
        by_env[run.env_id].push_back(std::move(run));
    }

    ReportResult result;
    std::ostringstream csv;
    csv << "env,step,score_mean_over_runs,score_std_over_runs\n";
    std::vector<double> normalized_values;

    for (auto& [env_id, runs] : by_env) {
        // Align score traces on steps present in every run of this env.
        std::map<long, std::pair<double, int>> by_step;  // step -> (sum, count)
        std::map<long, double> sq_by_step;
        for (const LoadedRun& run : runs) {
            for (const MetricRow& row : run.trace.rows()) {
                if (!row.score_mean) continue;
                auto& acc = by_step[row.step];
                acc.first += *row.score_mean;
                acc.second += 1;
                sq_by_step[row.step] += *row.score_mean * *row.score_mean;
            }
        }
        for (const auto& [step, acc] : by_step) {
            if (acc.second != static_cast<int>(runs.size())) continue;  // not aligned
            double mean = acc.first / acc.second;
            double var = sq_by_step[step] / acc.second - mean * mean;
            csv << env_id << ',' << step << ',' << format_double(mean) << ','
                << format_double(std::sqrt(std::max(0.0, var))) << "\n";
        }

        ReportEnvRow row;
        row.env_id = env_id;
        row.num_runs = static_cast<int>(runs.size());
        std::vector<double> finals;
        for (const LoadedRun& run : runs) {
            auto f = run.trace.final_score_mean();
            if (f) finals.push_back(*f);
        }
        if (finals.empty()) throw ConfigError("report: no evaluation scores for env " + env_id);
        double mean = 0.0;
        for (double f : finals) mean += f;
        mean /= finals.size();
        double var = 0.0;
        for (double f : finals) var += (f - mean) * (f - mean);
        row.final_score_mean = mean;
        row.final_score_std = finals.size() > 1 ? std::sqrt(var / (finals.size() - 1)) : 0.0;

        if (baselines) {
            if (!baselines->contains(env_id))
                throw ConfigError("report: baselines file has no entry for environment '" + env_id +
                                  "'");
            const json& b = baselines->at(env_id);
            row.normalized = normalized_score(mean, b.at("random").get<double>(),
                                              b.at("reference").get<double>());
            normalized_values.push_back(*row.normalized);
        }
        result.per_env.push_back(std::move(row));
    }

    if (!normalized_values.empty()) {
        double m = 0.0;
        for (double v : normalized_values) m += v;
        result.normalized_mean = m / normalized_values.size();
        result.normalized_median = median(normalized_values);
    }

    std::ostringstream md;
    md << "# Run comparison\n\n";
    md << "| environment | runs | final score (mean +- std) |";
    if (baselines) md << " normalized |";
    md << "\n|---|---|---|";
    if (baselines) md << "---|";
    md << "\n";
    for (const ReportEnvRow& row : result.per_env) {
        md << "| " << row.env_id << " | " << row.num_runs << " | " << format_double(row.final_score_mean)
           << " +- " << format_double(row.final_score_std) << " |";
        if (baselines) md << ' ' << format_double(*row.normalized) << " |";
        md << "\n";
    }
    if (result.normalized_mean) {
        md << "\nMean normalized score: " << format_double(*result.normalized_mean) << "\n";
        md << "Median normalized score: " << format_double(*result.normalized_median) << "\n";
    }
    result.markdown = md.str();
    result.csv = csv.str();
    return result;
}

}  // namespace sacd
