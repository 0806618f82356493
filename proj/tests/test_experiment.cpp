#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "sacd/errors.hpp"
#include "sacd/experiment.hpp"
#include "sacd/metrics.hpp"

using namespace sacd;
using nlohmann::json;

namespace {

json tiny_run_config(const std::string& output_dir) {
    return json{
        {"env",
         {{"id", "chain"},
          {"params",
           {{"length", 3}, {"slip_prob", 0.0}, {"max_episode_steps", 30}, {"gamma", 0.95}}}}},
        {"agent",
         {{"hidden_dims", {4}},
          {"batch_size", 8},
          {"warmup_steps", 20},
          {"buffer_capacity", 512}}},
        {"total_env_steps", 200},
        {"eval_interval", 100},
        {"eval_episodes", 3},
        {"output_dir", output_dir},
        {"seeds", {1, 2}}};
}

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "sacd_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Hand-built run directory for report tests.
void fake_run(const std::filesystem::path& dir, const std::string& env_id, int seed,
              double final_score) {
    std::filesystem::create_directories(dir);
    json manifest{{"format_version", 1}, {"version", "test"}, {"env_id", env_id}, {"seed", seed}};
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump() << "\n";
    MetricTrace trace;
    MetricRow row;
    row.step = 100;
    row.score_mean = final_score;
    row.score_std = 0.0;
    trace.add(row);
    trace.write_csv(dir / "metrics.csv");
}

}  // namespace

TEST_CASE("config parsing applies defaults and validates") {
    RunConfig c = parse_run_config(tiny_run_config("out"));
    CHECK(c.env.id == "chain");
    CHECK(c.env.chain.length == 3);
    CHECK(c.agent.batch_size == 8);
    CHECK(c.agent.variant.target_rule == TargetRule::kClippedMin);
    CHECK(!c.agent.variant.q_clip);
    CHECK(c.eval_episodes == 3);
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2});
}

TEST_CASE("config errors name the first invalid field") {
    json bad = tiny_run_config("out");
    bad["agent"]["tau"] = 0.0;
    CHECK_THROWS_WITH_AS(parse_run_config(bad), doctest::Contains("tau"), ConfigError);

    json dup = tiny_run_config("out");
    dup["seeds"] = {1, 1};
    CHECK_THROWS_WITH_AS(parse_run_config(dup), doctest::Contains("seeds"), ConfigError);

    json noenv = tiny_run_config("out");
    noenv.erase("env");
    CHECK_THROWS_WITH_AS(parse_run_config(noenv), doctest::Contains("env"), ConfigError);

    json badenv = tiny_run_config("out");
    badenv["env"]["id"] = "atari";
    CHECK_THROWS_WITH_AS(parse_run_config(badenv), doctest::Contains("env.id"), ConfigError);

    json badtype = tiny_run_config("out");
    badtype["agent"]["gamma"] = "high";
    CHECK_THROWS_WITH_AS(parse_run_config(badtype), doctest::Contains("agent.gamma"), ConfigError);

    json badinterval = tiny_run_config("out");
    badinterval["eval_interval"] = 10000;
    CHECK_THROWS_WITH_AS(parse_run_config(badinterval), doctest::Contains("eval_interval"),
                         ConfigError);
}

TEST_CASE("dotted-path overrides") {
    json doc = canonicalize_run_config(tiny_run_config("out"));
    apply_overrides(doc, {"agent.variant.q_clip=0.5", "agent.tau=0.01", "env.params.length=5"});
    RunConfig c = parse_run_config(doc);
    CHECK(*c.agent.variant.q_clip == 0.5);
    CHECK(c.agent.tau == 0.01);
    CHECK(c.env.chain.length == 5);

    CHECK_THROWS_AS(apply_overrides(doc, {"agent.nonexistent=1"}), ConfigError);
    CHECK_THROWS_AS(apply_overrides(doc, {"missing-equals"}), ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
    RunConfig a = parse_run_config(tiny_run_config("out"));
    RunConfig b = parse_run_config(tiny_run_config("out"));
    CHECK(config_hash(a) == config_hash(b));
    b.agent.tau *= 2;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("metric trace rejects NaN cells with a diagnosis") {
    MetricTrace trace;
    MetricRow row;
    row.step = 5;
    row.policy_loss = std::nan("");
    CHECK_THROWS_WITH_AS(trace.add(row), doctest::Contains("policy_loss"), NanAbortError);
}

TEST_CASE("metric trace keeps steps nondecreasing and merges same-step rows") {
    MetricTrace trace;
    MetricRow a;
    a.step = 1;
    a.policy_loss = 0.5;
    trace.add(a);
    MetricRow b;
    b.step = 1;
    b.score_mean = 2.0;
    trace.add(b);
    CHECK(trace.rows().size() == 1);
    CHECK(*trace.rows()[0].policy_loss == 0.5);
    CHECK(*trace.rows()[0].score_mean == 2.0);

    MetricRow back;
    back.step = 0;
    CHECK_THROWS_AS(trace.add(back), std::logic_error);
}

TEST_CASE("metric trace csv round trip") {
    auto dir = fresh_dir("trace_roundtrip");
    MetricTrace trace;
    MetricRow a;
    a.step = 1;
    a.entropy_mean = 0.6931471805599453;
    a.alpha = 1.0;
    trace.add(a);
    MetricRow b;
    b.step = 2;
    b.score_mean = -0.125;
    trace.add(b);
    trace.write_csv(dir / "m.csv");
    MetricTrace back = MetricTrace::read_csv(dir / "m.csv");
    REQUIRE(back.rows().size() == 2);
    CHECK(*back.rows()[0].entropy_mean == 0.6931471805599453);
    CHECK(!back.rows()[0].score_mean);
    CHECK(*back.rows()[1].score_mean == -0.125);
}

TEST_CASE("run with zero steps writes manifest and empty trace") {
    auto dir = fresh_dir("zero_steps");
    json doc = tiny_run_config((dir / "runs").string());
    doc["total_env_steps"] = 0;
    doc["seeds"] = {7};
    RunConfig config = parse_run_config(doc);
    auto runs = run_experiment(config);
    REQUIRE(runs.size() == 1);
    CHECK(!runs[0].final_score_mean);
    CHECK(std::filesystem::exists(runs[0].dir / "manifest.json"));
    MetricTrace trace = MetricTrace::read_csv(runs[0].dir / "metrics.csv");
    CHECK(trace.rows().empty());
}

TEST_CASE("run produces per-seed artifacts with distinct seeds") {
    auto dir = fresh_dir("two_seeds");
    RunConfig config = parse_run_config(tiny_run_config((dir / "runs").string()));
    auto runs = run_experiment(config);
    REQUIRE(runs.size() == 2);
    for (const auto& run : runs) {
        json manifest;
        std::ifstream(run.dir / "manifest.json") >> manifest;
        CHECK(manifest.at("seed").get<std::uint64_t>() == run.seed);
        CHECK(manifest.at("env_id") == "chain");
        CHECK(std::filesystem::exists(run.dir / "checkpoint" / "policy.json"));
        CHECK(std::filesystem::exists(run.dir / "checkpoint" / "policy.bin"));
        CHECK(run.final_score_mean.has_value());
    }
    CHECK(runs[0].seed != runs[1].seed);
}

TEST_CASE("identical configs give byte-identical metric csvs") {
    auto dir_a = fresh_dir("det_a");
    auto dir_b = fresh_dir("det_b");
    json doc = tiny_run_config("");
    doc["seeds"] = {3};

    doc["output_dir"] = (dir_a / "runs").string();
    auto runs_a = run_experiment(parse_run_config(doc));
    doc["output_dir"] = (dir_b / "runs").string();
    auto runs_b = run_experiment(parse_run_config(doc));

    CHECK(slurp(runs_a[0].dir / "metrics.csv") == slurp(runs_b[0].dir / "metrics.csv"));
}

TEST_CASE("checkpoint parameters round trip from a finished run") {
    auto dir = fresh_dir("ckpt_run");
    json doc = tiny_run_config((dir / "runs").string());
    doc["seeds"] = {5};
    auto runs = run_experiment(parse_run_config(doc));
    LoadedCheckpoint policy = load_checkpoint(runs[0].dir / "checkpoint" / "policy");
    CHECK(policy.params.tensors().size() == 4);  // w0,b0,w1,b1
    MlpSpec spec = MlpSpec::from_json(policy.spec_json);
    CHECK(spec.input_dim == 3);
    CHECK(spec.output_dim == 2);
}

TEST_CASE("sweep: empty grid is a single cell; product counts multiply") {
    auto dir = fresh_dir("sweep_counts");
    json doc = tiny_run_config("ignored");
    doc["total_env_steps"] = 60;
    doc["eval_interval"] = 60;
    doc["seeds"] = {1};

    SweepResult empty = sweep(doc, {}, dir / "empty");
    CHECK(empty.cells.size() == 1);

    std::map<std::string, std::vector<json>> grid{
        {"agent.variant.entropy_penalty_beta", {0.1, 0.5}},
        {"agent.variant.q_clip", {0.5, 1.0}},
    };
    SweepResult four = sweep(doc, grid, dir / "grid");
    CHECK(four.cells.size() == 4);
    for (const auto& cell : four.cells) CHECK(cell.num_seeds == 1);
    // Every combination appears exactly once.
    std::set<std::pair<double, double>> seen;
    for (const auto& cell : four.cells)
        seen.insert({cell.assignment.at("agent.variant.entropy_penalty_beta").get<double>(),
                     cell.assignment.at("agent.variant.q_clip").get<double>()});
    CHECK(seen.size() == 4);

    CHECK_THROWS_AS(sweep(doc, {{"agent.bogus", {1}}}, dir / "bad"), ConfigError);
}

TEST_CASE("sweep summary is reproducible from per-run traces") {
    auto dir = fresh_dir("sweep_recompute");
    json doc = tiny_run_config("ignored");
    doc["total_env_steps"] = 80;
    doc["eval_interval"] = 40;
    doc["seeds"] = {1, 2};
    std::map<std::string, std::vector<json>> grid{{"agent.tau", {0.005, 0.05}}};
    SweepResult result = sweep(doc, grid, dir / "s");

    for (const auto& cell : result.cells) {
        char cell_name[32];
        std::snprintf(cell_name, sizeof(cell_name), "cell_%03d", cell.index);
        std::vector<double> finals;
        for (int seed : {1, 2}) {
            auto trace = MetricTrace::read_csv(dir / "s" / cell_name /
                                               ("seed_" + std::to_string(seed)) / "metrics.csv");
            REQUIRE(trace.final_score_mean().has_value());
            finals.push_back(*trace.final_score_mean());
        }
        double mean = (finals[0] + finals[1]) / 2.0;
        double var = 0.0;
        for (double f : finals) var += (f - mean) * (f - mean);
        double stdev = std::sqrt(var / (finals.size() - 1));
        CHECK(std::abs(cell.final_score_mean - mean) < 1e-9);
        CHECK(std::abs(cell.final_score_std - stdev) < 1e-9);
    }
}

TEST_CASE("report: single run normalizes to one against its own final score") {
    auto dir = fresh_dir("report_single");
    fake_run(dir / "run0", "chain", 0, 0.42);
    json baselines{{"chain", {{"random", 0.0}, {"reference", 0.42}}}};
    ReportResult r = report({dir / "run0"}, baselines);
    REQUIRE(r.per_env.size() == 1);
    CHECK(*r.per_env[0].normalized == doctest::Approx(1.0));
    CHECK(*r.normalized_mean == doctest::Approx(1.0));
}

TEST_CASE("report: identical runs have zero spread") {
    auto dir = fresh_dir("report_twins");
    fake_run(dir / "a", "chain", 0, 0.3);
    fake_run(dir / "b", "chain", 1, 0.3);
    ReportResult r = report({dir / "a", dir / "b"}, std::nullopt);
    REQUIRE(r.per_env.size() == 1);
    CHECK(r.per_env[0].final_score_std == 0.0);
    CHECK(r.per_env[0].num_runs == 2);
}

TEST_CASE("report: hand-chosen scores across three environments") {
    auto dir = fresh_dir("report_three");
    fake_run(dir / "r1", "env_a", 0, 10.0);
    fake_run(dir / "r2", "env_b", 0, 5.0);
    fake_run(dir / "r3", "env_c", 0, -1.0);
    json baselines{
        {"env_a", {{"random", 0.0}, {"reference", 20.0}}},   // 0.5
        {"env_b", {{"random", 5.0}, {"reference", 10.0}}},   // 0.0
        {"env_c", {{"random", 1.0}, {"reference", -1.0}}},   // 1.0
    };
    ReportResult r = report({dir / "r1", dir / "r2", dir / "r3"}, baselines);
    CHECK(*r.normalized_mean == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(*r.normalized_median == doctest::Approx(0.5).epsilon(1e-12));

    json missing = baselines;
    missing.erase("env_b");
    CHECK_THROWS_WITH_AS(report({dir / "r1", dir / "r2", dir / "r3"}, missing),
                         doctest::Contains("env_b"), ConfigError);
}

TEST_CASE("report accepts every artifact directory produced by run") {
    auto dir = fresh_dir("roundtrip_schema");
    for (const std::string rule : {"clipped_min", "single", "average"}) {
        json doc = tiny_run_config((dir / rule).string());
        doc["total_env_steps"] = 60;
        doc["eval_interval"] = 60;
        doc["seeds"] = {1};
        doc["agent"]["variant"] = {{"target_rule", rule},
                                   {"q_clip", rule == "average" ? json(0.5) : json(nullptr)},
                                   {"entropy_penalty_beta", json(0.5)}};
        run_experiment(parse_run_config(doc));
    }
    ReportResult r = report({dir / "clipped_min" / "seed_1", dir / "single" / "seed_1",
                             dir / "average" / "seed_1"},
                            std::nullopt);
    CHECK(r.per_env[0].num_runs == 3);
}
