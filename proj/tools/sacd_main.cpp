#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sacd/errors.hpp"
#include "sacd/experiment.hpp"
#include "sacd/oracles.hpp"
#include "sacd/version.hpp"

namespace {

using nlohmann::json;

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw sacd::IoError("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw sacd::ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

/// Resolves a relative output_dir under $SACD_OUTPUT_ROOT when it is set.
void apply_output_root(json& config) {
    const char* root = std::getenv("SACD_OUTPUT_ROOT");
    if (!root || !config.contains("output_dir")) return;
    std::filesystem::path dir = config.at("output_dir").get<std::string>();
    if (dir.is_relative()) config["output_dir"] = (std::filesystem::path(root) / dir).string();
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides) {
    json doc = load_json(config_path);
    if (!overrides.empty()) {
        doc = sacd::canonicalize_run_config(doc);
        sacd::apply_overrides(doc, overrides);
    }
    apply_output_root(doc);
    sacd::RunConfig config = sacd::parse_run_config(doc);
    std::vector<sacd::RunArtifacts> runs = sacd::run_experiment(config);
    for (const auto& run : runs) {
        std::cout << "seed " << run.seed << ": " << run.dir.string();
        if (run.final_score_mean) std::cout << " final_score=" << *run.final_score_mean;
        std::cout << "\n";
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_path,
              const std::vector<std::string>& overrides) {
    json doc = load_json(config_path);
    if (!overrides.empty()) {
        doc = sacd::canonicalize_run_config(doc);
        sacd::apply_overrides(doc, overrides);
    }
    apply_output_root(doc);
    json grid_doc = load_json(grid_path);
    if (!grid_doc.is_object()) throw sacd::ConfigError("grid file must be a JSON object");
    std::map<std::string, std::vector<json>> grid;
    for (const auto& [key, values] : grid_doc.items()) {
        if (!values.is_array()) throw sacd::ConfigError("grid entry '" + key + "' must be an array");
        grid[key] = std::vector<json>(values.begin(), values.end());
    }
    std::string out_dir = doc.contains("output_dir") ? doc.at("output_dir").get<std::string>()
                                                     : std::string("sweep_out");
    sacd::SweepResult result = sacd::sweep(doc, grid, out_dir);
    std::cout << "summary: " << result.summary_csv.string() << " (" << result.cells.size()
              << " cells)\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& baselines_path,
               const std::string& out_dir) {
    std::optional<json> baselines;
    if (!baselines_path.empty()) baselines = load_json(baselines_path);
    std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
    sacd::ReportResult result = sacd::report(paths, baselines);

    std::filesystem::path out = out_dir;
    std::filesystem::create_directories(out);
    std::ofstream md(out / "report.md");
    std::ofstream csv(out / "report.csv");
    if (!md || !csv) throw sacd::IoError("cannot write report files in " + out.string());
    md << result.markdown;
    csv << result.csv;
    std::cout << result.markdown;
    return 0;
}

int cmd_oracle(const std::string& mdp_path, const std::string& policy_path, double alpha,
               double tol) {
    sacd::TabularMDP mdp = sacd::load_mdp(mdp_path);
    sacd::TabularPolicy policy;
    if (policy_path.empty()) {
        policy = sacd::uniform_policy(mdp.num_states, mdp.num_actions);
    } else {
        json p = load_json(policy_path);
        auto rows = p.get<std::vector<std::vector<double>>>();
        policy.resize(rows.size(), rows.empty() ? 0 : rows[0].size());
        for (std::size_t s = 0; s < rows.size(); ++s) {
            if (static_cast<Eigen::Index>(rows[s].size()) != policy.cols())
                throw sacd::ConfigError("policy file has ragged rows");
            for (std::size_t a = 0; a < rows[s].size(); ++a) policy(s, a) = rows[s][a];
        }
    }
    sacd::SoftEvalResult result = sacd::soft_policy_evaluation(mdp, policy, alpha, tol);

    json out;
    json q = json::array();
    for (int s = 0; s < mdp.num_states; ++s) {
        json row = json::array();
        for (int a = 0; a < mdp.num_actions; ++a) row.push_back(result.q_true(s, a));
        q.push_back(std::move(row));
    }
    out["q_true"] = std::move(q);
    json v = json::array();
    for (int s = 0; s < mdp.num_states; ++s) v.push_back(result.v_true(s));
    out["v_true"] = std::move(v);
    out["iterations"] = result.iterations;
    out["residual"] = result.residual;
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete soft actor-critic training library and experiment runner"};
    app.set_version_flag("--version", sacd::kVersion);
    app.require_subcommand(1);

    std::string config_path, grid_path, baselines_path, out_dir = ".", mdp_path, policy_path;
    std::vector<std::string> overrides, report_dirs;
    double alpha = 1.0, tol = 1e-10;

    CLI::App* run = app.add_subcommand("run", "Train per config; write traces and checkpoints");
    run->add_option("config", config_path, "run config JSON")->required();
    run->add_option("--set", overrides, "override a dotted config path, e.g. agent.tau=0.01");

    CLI::App* sw = app.add_subcommand("sweep", "Cartesian hyperparameter sweep");
    sw->add_option("config", config_path, "base run config JSON")->required();
    sw->add_option("--grid", grid_path, "grid JSON: {dotted.path: [values...]}")->required();
    sw->add_option("--set", overrides, "override a dotted config path");

    CLI::App* rep = app.add_subcommand("report", "Summarize finished run directories");
    rep->add_option("dirs", report_dirs, "run directories")->required();
    rep->add_option("--baselines", baselines_path, "JSON {env: {random, reference}}");
    rep->add_option("--out", out_dir, "where to write report.md / report.csv");

    CLI::App* oracle = app.add_subcommand("oracle", "Exact soft policy evaluation of a tabular MDP");
    oracle->add_option("mdp", mdp_path, "TabularMDP JSON document")->required();
    oracle->add_option("--policy", policy_path, "per-state probability rows (default: uniform)");
    oracle->add_option("--alpha", alpha, "entropy temperature");
    oracle->add_option("--tol", tol, "fixed-point tolerance");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(config_path, overrides);
        if (sw->parsed()) return cmd_sweep(config_path, grid_path, overrides);
        if (rep->parsed()) return cmd_report(report_dirs, baselines_path, out_dir);
        if (oracle->parsed()) return cmd_oracle(mdp_path, policy_path, alpha, tol);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const sacd::NanAbortError& e) {
        std::cerr << "NaN abort: " << e.what() << "\n";
        return 2;
    } catch (const sacd::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 3;
    } catch (const sacd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
