#include "sacd/config.hpp"

#include <algorithm>
#include <set>

#include "sacd/errors.hpp"

namespace sacd {

using nlohmann::json;

BuiltEnv EnvConfig::build() const {
    if (id == "chain") return make_chain(chain);
    if (id == "gridworld") return make_gridworld(gridworld);
    if (id == "random_mdp") return make_random_mdp(random_mdp);
    throw ConfigError("env.id: unknown environment '" + id + "'");
}

void EnvConfig::validate() const {
    if (id == "chain")
        chain.validate();
    else if (id == "gridworld")
        gridworld.validate();
    else if (id == "random_mdp")
        random_mdp.validate();
    else
        throw ConfigError("env.id: unknown environment '" + id + "'");
}

void RunConfig::validate() const {
    env.validate();
    try {
        agent.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("agent: ") + e.what());
    }
    if (total_env_steps < 0) throw ConfigError("total_env_steps: must be >= 0");
    if (eval_interval < 1) throw ConfigError("eval_interval: must be >= 1");
    if (total_env_steps > 0 && eval_interval > total_env_steps)
        throw ConfigError("eval_interval: must not exceed total_env_steps");
    if (eval_episodes < 1) throw ConfigError("eval_episodes: must be >= 1");
    if (bias_interval < 0) throw ConfigError("bias_interval: must be >= 0");
    if (bias_weighting != "visitation" && bias_weighting != "uniform")
        throw ConfigError("bias_weighting: must be \"visitation\" or \"uniform\"");
    if (similarity_interval < 0) throw ConfigError("similarity_interval: must be >= 0");
    if (similarity_rollout_steps < 1) throw ConfigError("similarity_rollout_steps: must be >= 1");
    if (visitation_rollout_steps < 1) throw ConfigError("visitation_rollout_steps: must be >= 1");
    if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
    if (seeds.empty()) throw ConfigError("seeds: must be nonempty");
    std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
    if (distinct.size() != seeds.size()) throw ConfigError("seeds: must be distinct");
}

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
    throw ConfigError("field '" + path + "': " + why);
}

const json& require(const json& j, const std::string& path, const char* key) {
    if (!j.is_object()) bad_field(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) bad_field(path.empty() ? key : path + "." + key, "missing");
    return *it;
}

template <typename T>
T get_as(const json& v, const std::string& path) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        bad_field(path, "wrong type");
    }
}

template <typename T>
T req(const json& j, const std::string& parent, const char* key) {
    std::string path = parent.empty() ? key : parent + "." + key;
    return get_as<T>(require(j, parent, key), path);
}

template <typename T>
T opt(const json& j, const std::string& parent, const char* key, T fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    std::string path = parent.empty() ? key : parent + "." + key;
    return get_as<T>(j.at(key), path);
}

std::optional<double> opt_nullable(const json& j, const std::string& parent, const char* key) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return std::nullopt;
    std::string path = parent.empty() ? key : parent + "." + key;
    return get_as<double>(j.at(key), path);
}

LossVariant parse_variant(const json& j, const std::string& parent) {
    LossVariant v;
    std::string rule = opt<std::string>(j, parent, "target_rule", "clipped_min");
    try {
        v.target_rule = target_rule_from_name(rule);
    } catch (const std::invalid_argument& e) {
        bad_field(parent + ".target_rule", e.what());
    }
    v.q_clip = opt_nullable(j, parent, "q_clip");
    v.entropy_penalty_beta = opt_nullable(j, parent, "entropy_penalty_beta");
    try {
        v.validate();
    } catch (const std::invalid_argument& e) {
        bad_field(parent, e.what());
    }
    return v;
}

}  // namespace

RunConfig parse_run_config(const json& j) {
    RunConfig c;

    const json& env = require(j, "", "env");
    c.env.id = req<std::string>(env, "env", "id");
    const json params = env.contains("params") ? env.at("params") : json::object();
    const std::string ep = "env.params";
    if (c.env.id == "chain") {
        SparseChainSpec& s = c.env.chain;
        s.length = opt<int>(params, ep, "length", s.length);
        s.step_penalty = opt<double>(params, ep, "step_penalty", s.step_penalty);
        s.goal_reward = opt<double>(params, ep, "goal_reward", s.goal_reward);
        s.max_episode_steps = opt<int>(params, ep, "max_episode_steps", s.max_episode_steps);
        s.slip_prob = opt<double>(params, ep, "slip_prob", s.slip_prob);
        s.gamma = opt<double>(params, ep, "gamma", s.gamma);
    } else if (c.env.id == "gridworld") {
        GridworldSpec& s = c.env.gridworld;
        s.width = opt<int>(params, ep, "width", s.width);
        s.height = opt<int>(params, ep, "height", s.height);
        if (params.contains("walls")) {
            auto walls = get_as<std::vector<std::vector<int>>>(params.at("walls"), ep + ".walls");
            s.walls.clear();
            for (const auto& w : walls) {
                if (w.size() != 2) bad_field(ep + ".walls", "each wall must be [x, y]");
                s.walls.insert({w[0], w[1]});
            }
        }
        if (params.contains("start")) {
            auto v = get_as<std::vector<int>>(params.at("start"), ep + ".start");
            if (v.size() != 2) bad_field(ep + ".start", "must be [x, y]");
            s.start = {v[0], v[1]};
        }
        if (params.contains("goal")) {
            auto v = get_as<std::vector<int>>(params.at("goal"), ep + ".goal");
            if (v.size() != 2) bad_field(ep + ".goal", "must be [x, y]");
            s.goal = {v[0], v[1]};
        }
        s.step_penalty = opt<double>(params, ep, "step_penalty", s.step_penalty);
        s.goal_reward = opt<double>(params, ep, "goal_reward", s.goal_reward);
        s.max_episode_steps = opt<int>(params, ep, "max_episode_steps", s.max_episode_steps);
        s.gamma = opt<double>(params, ep, "gamma", s.gamma);
    } else if (c.env.id == "random_mdp") {
        RandomMdpSpec& s = c.env.random_mdp;
        s.num_states = opt<int>(params, ep, "num_states", s.num_states);
        s.num_actions = opt<int>(params, ep, "num_actions", s.num_actions);
        s.reward_sparsity = opt<double>(params, ep, "reward_sparsity", s.reward_sparsity);
        s.seed = opt<std::uint64_t>(params, ep, "seed", s.seed);
        s.gamma = opt<double>(params, ep, "gamma", s.gamma);
        s.max_episode_steps = opt<int>(params, ep, "max_episode_steps", s.max_episode_steps);
    } else {
        bad_field("env.id", "unknown environment '" + c.env.id + "'");
    }
    try {
        c.env.validate();
    } catch (const std::invalid_argument& e) {
        bad_field("env.params", e.what());
    }

    const json& agent = require(j, "", "agent");
    AgentConfig& a = c.agent;
    if (agent.contains("variant")) a.variant = parse_variant(agent.at("variant"), "agent.variant");
    std::string pqr = opt<std::string>(agent, "agent", "policy_q_rule", "min");
    try {
        a.policy_q_rule = policy_q_rule_from_name(pqr);
    } catch (const std::invalid_argument& e) {
        bad_field("agent.policy_q_rule", e.what());
    }
    a.gamma = opt<double>(agent, "agent", "gamma", a.gamma);
    a.lr_critic = opt<double>(agent, "agent", "lr_critic", a.lr_critic);
    a.lr_policy = opt<double>(agent, "agent", "lr_policy", a.lr_policy);
    a.lr_alpha = opt<double>(agent, "agent", "lr_alpha", a.lr_alpha);
    a.tau = opt<double>(agent, "agent", "tau", a.tau);
    a.target_update_interval =
        opt<long>(agent, "agent", "target_update_interval", a.target_update_interval);
    a.batch_size = opt<int>(agent, "agent", "batch_size", a.batch_size);
    a.warmup_steps = opt<long>(agent, "agent", "warmup_steps", a.warmup_steps);
    a.train_interval = opt<long>(agent, "agent", "train_interval", a.train_interval);
    if (agent.contains("target_entropy") && !agent.at("target_entropy").is_null()) {
        const json& te = agent.at("target_entropy");
        if (te.is_string()) {
            if (te.get<std::string>() != "auto")
                bad_field("agent.target_entropy", "must be a number or \"auto\"");
            a.target_entropy = std::nullopt;
        } else {
            a.target_entropy = get_as<double>(te, "agent.target_entropy");
        }
    }
    a.alpha_init = opt<double>(agent, "agent", "alpha_init", a.alpha_init);
    a.buffer_capacity = opt<std::size_t>(agent, "agent", "buffer_capacity", a.buffer_capacity);
    a.hidden_dims = opt<std::vector<long>>(agent, "agent", "hidden_dims", a.hidden_dims);
    std::string act = opt<std::string>(agent, "agent", "activation", "relu");
    if (act == "relu")
        a.activation = Activation::kRelu;
    else if (act == "tanh")
        a.activation = Activation::kTanh;
    else
        bad_field("agent.activation", "must be \"relu\" or \"tanh\"");
    std::string opt_rule = opt<std::string>(agent, "agent", "optimizer", "adam");
    if (opt_rule == "adam")
        a.optimizer = OptimizerRule::kAdam;
    else if (opt_rule == "sgd")
        a.optimizer = OptimizerRule::kSgd;
    else
        bad_field("agent.optimizer", "must be \"adam\" or \"sgd\"");
    a.grad_clip_norm = opt_nullable(agent, "agent", "grad_clip_norm");
    a.seed = opt<std::uint64_t>(agent, "agent", "seed", a.seed);

    c.total_env_steps = req<long>(j, "", "total_env_steps");
    c.eval_interval = opt<long>(j, "", "eval_interval", c.eval_interval);
    c.eval_episodes = opt<int>(j, "", "eval_episodes", c.eval_episodes);
    c.bias_interval = opt<long>(j, "", "bias_interval", c.bias_interval);
    c.bias_weighting = opt<std::string>(j, "", "bias_weighting", c.bias_weighting);
    c.similarity_interval = opt<long>(j, "", "similarity_interval", c.similarity_interval);
    c.similarity_rollout_steps =
        opt<long>(j, "", "similarity_rollout_steps", c.similarity_rollout_steps);
    c.visitation_rollout_steps =
        opt<long>(j, "", "visitation_rollout_steps", c.visitation_rollout_steps);
    c.output_dir = req<std::string>(j, "", "output_dir");
    c.seeds = req<std::vector<std::uint64_t>>(j, "", "seeds");

    c.validate();
    return c;
}

json run_config_to_json(const RunConfig& c) {
    json j;
    json env;
    env["id"] = c.env.id;
    json params;
    if (c.env.id == "chain") {
        const auto& s = c.env.chain;
        params = {{"length", s.length},
                  {"step_penalty", s.step_penalty},
                  {"goal_reward", s.goal_reward},
                  {"max_episode_steps", s.max_episode_steps},
                  {"slip_prob", s.slip_prob},
                  {"gamma", s.gamma}};
    } else if (c.env.id == "gridworld") {
        const auto& s = c.env.gridworld;
        json walls = json::array();
        for (const auto& w : s.walls) walls.push_back({w.first, w.second});
        params = {{"width", s.width},
                  {"height", s.height},
                  {"walls", walls},
                  {"start", {s.start.first, s.start.second}},
                  {"goal", {s.goal.first, s.goal.second}},
                  {"step_penalty", s.step_penalty},
                  {"goal_reward", s.goal_reward},
                  {"max_episode_steps", s.max_episode_steps},
                  {"gamma", s.gamma}};
    } else {
        const auto& s = c.env.random_mdp;
        params = {{"num_states", s.num_states},
                  {"num_actions", s.num_actions},
                  {"reward_sparsity", s.reward_sparsity},
                  {"seed", s.seed},
                  {"gamma", s.gamma},
                  {"max_episode_steps", s.max_episode_steps}};
    }
    env["params"] = std::move(params);
    j["env"] = std::move(env);

    const AgentConfig& a = c.agent;
    json variant;
    variant["target_rule"] = target_rule_name(a.variant.target_rule);
    variant["q_clip"] = a.variant.q_clip ? json(*a.variant.q_clip) : json(nullptr);
    variant["entropy_penalty_beta"] =
        a.variant.entropy_penalty_beta ? json(*a.variant.entropy_penalty_beta) : json(nullptr);
    json agent;
    agent["variant"] = std::move(variant);
    agent["policy_q_rule"] = policy_q_rule_name(a.policy_q_rule);
    agent["gamma"] = a.gamma;
    agent["lr_critic"] = a.lr_critic;
    agent["lr_policy"] = a.lr_policy;
    agent["lr_alpha"] = a.lr_alpha;
    agent["tau"] = a.tau;
    agent["target_update_interval"] = a.target_update_interval;
    agent["batch_size"] = a.batch_size;
    agent["warmup_steps"] = a.warmup_steps;
    agent["train_interval"] = a.train_interval;
    agent["target_entropy"] = a.target_entropy ? json(*a.target_entropy) : json("auto");
    agent["alpha_init"] = a.alpha_init;
    agent["buffer_capacity"] = a.buffer_capacity;
    agent["hidden_dims"] = a.hidden_dims;
    agent["activation"] = a.activation == Activation::kRelu ? "relu" : "tanh";
    agent["optimizer"] = a.optimizer == OptimizerRule::kAdam ? "adam" : "sgd";
    agent["grad_clip_norm"] = a.grad_clip_norm ? json(*a.grad_clip_norm) : json(nullptr);
    agent["seed"] = a.seed;
    j["agent"] = std::move(agent);

    j["total_env_steps"] = c.total_env_steps;
    j["eval_interval"] = c.eval_interval;
    j["eval_episodes"] = c.eval_episodes;
    j["bias_interval"] = c.bias_interval;
    j["bias_weighting"] = c.bias_weighting;
    j["similarity_interval"] = c.similarity_interval;
    j["similarity_rollout_steps"] = c.similarity_rollout_steps;
    j["visitation_rollout_steps"] = c.visitation_rollout_steps;
    j["output_dir"] = c.output_dir;
    j["seeds"] = c.seeds;
    return j;
}

json canonicalize_run_config(const json& doc) { return run_config_to_json(parse_run_config(doc)); }

std::string config_hash(const RunConfig& config) {
    std::string dump = run_config_to_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : dump) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void json_set_path(json& doc, const std::string& path, const json& value) {
    json* cur = &doc;
    std::size_t begin = 0;
    std::vector<std::string> parts;
    while (begin <= path.size()) {
        std::size_t dot = path.find('.', begin);
        if (dot == std::string::npos) {
            parts.push_back(path.substr(begin));
            break;
        }
        parts.push_back(path.substr(begin, dot - begin));
        begin = dot + 1;
    }
    if (parts.empty() || parts.front().empty()) throw ConfigError("empty config path");
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!cur->is_object() || !cur->contains(parts[i]))
            throw ConfigError("unknown config path '" + path + "'");
        cur = &(*cur)[parts[i]];
    }
    if (!cur->is_object() || !cur->contains(parts.back()))
        throw ConfigError("unknown config path '" + path + "'");
    (*cur)[parts.back()] = value;
}

void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
    for (const std::string& kv : overrides) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override '" + kv + "' is not of the form key=value");
        std::string key = kv.substr(0, eq);
        std::string raw = kv.substr(eq + 1);
        json value = json::accept(raw) ? json::parse(raw) : json(raw);
        json_set_path(doc, key, value);
    }
}

}  // namespace sacd
