#include "sacd/agent.hpp"

#include <cmath>
#include <stdexcept>

namespace sacd {

void AgentConfig::validate() const {
    variant.validate();
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("AgentConfig: gamma must lie in [0,1)");
    // A zero learning rate freezes that component (its update is skipped).
    if (!(lr_critic >= 0.0 && lr_policy >= 0.0 && lr_alpha >= 0.0))
        throw std::invalid_argument("AgentConfig: learning rates must be >= 0");
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("AgentConfig: tau must be in (0,1]");
    if (target_update_interval < 1)
        throw std::invalid_argument("AgentConfig: target_update_interval must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("AgentConfig: batch_size must be >= 1");
    if (warmup_steps < 0) throw std::invalid_argument("AgentConfig: warmup_steps must be >= 0");
    if (train_interval < 1) throw std::invalid_argument("AgentConfig: train_interval must be >= 1");
    if (!(alpha_init > 0.0)) throw std::invalid_argument("AgentConfig: alpha_init must be > 0");
    if (buffer_capacity == 0)
        throw std::invalid_argument("AgentConfig: buffer_capacity must be >= 1");
    for (long h : hidden_dims)
        if (h < 1) throw std::invalid_argument("AgentConfig: hidden_dims entries must be >= 1");
    if (grad_clip_norm && !(*grad_clip_norm > 0.0))
        throw std::invalid_argument("AgentConfig: grad_clip_norm must be > 0");
}

namespace {

double resolve_target_entropy(const AgentConfig& config, int num_actions) {
    if (config.target_entropy) {
        double h = *config.target_entropy;
        double h_max = std::log(static_cast<double>(num_actions));
        if (!(h > 0.0 && h <= h_max + 1e-12))
            throw std::invalid_argument("AgentConfig: target_entropy must lie in (0, ln(A)]");
        return h;
    }
    return default_target_entropy(num_actions);
}

}  // namespace

Agent::Agent(const AgentConfig& config, int obs_dim, int num_actions)
    : config_(config),
      obs_dim_(obs_dim),
      num_actions_(num_actions),
      policy_spec_{obs_dim, config.hidden_dims, num_actions, config.activation},
      critic_spec_{obs_dim, config.hidden_dims, num_actions, config.activation},
      target_entropy_(resolve_target_entropy(config, num_actions)),
      policy_(mlp_init(policy_spec_, derive_seed(config.seed, "init_policy"))),
      critic1_(mlp_init(critic_spec_, derive_seed(config.seed, "init_critic1"))),
      critic2_(mlp_init(critic_spec_, derive_seed(config.seed, "init_critic2"))),
      target1_(critic1_),
      target2_(critic2_),
      alpha_param_(config.alpha_init),
      opt_policy_(config.optimizer, config.lr_policy > 0.0 ? config.lr_policy : 1.0),
      opt_critic1_(config.optimizer, config.lr_critic > 0.0 ? config.lr_critic : 1.0),
      opt_critic2_(config.optimizer, config.lr_critic > 0.0 ? config.lr_critic : 1.0),
      opt_alpha_(config.optimizer, config.lr_alpha > 0.0 ? config.lr_alpha : 1.0),
      buffer_(config.buffer_capacity, num_actions, obs_dim),
      act_rng_(derive_seed(config.seed, "act")),
      buffer_rng_(derive_seed(config.seed, "buffer")),
      env_rng_(derive_seed(config.seed, "env_reset")) {
    config_.validate();
    if (obs_dim < 1) throw std::invalid_argument("Agent: obs_dim must be >= 1");
    if (num_actions < 2) throw std::invalid_argument("Agent: num_actions must be >= 2");
}

int Agent::act(const Vector& obs, ActionMode mode) {
    if (obs.size() != obs_dim_) throw std::invalid_argument("Agent::act: obs dimension mismatch");
    CategoricalDistribution dist = forward_policy(policy_, policy_spec_, obs);
    return mode == ActionMode::kStochastic ? dist.sample(act_rng_) : dist.argmax();
}

int Agent::uniform_action() { return static_cast<int>(act_rng_.uniform_index(num_actions_)); }

std::vector<double> Agent::collect(EnvInterface& env, long num_steps) {
    if (env.observation_dim() != obs_dim_ || env.num_actions() != num_actions_)
        throw std::invalid_argument("Agent::collect: environment shape mismatch");
    std::vector<double> completed;
    for (long i = 0; i < num_steps; ++i) {
        if (!episode_active_) {
            current_obs_ = env.reset(env_rng_.next_u64());
            episode_return_ = 0.0;
            episode_active_ = true;
        }
        CategoricalDistribution dist = forward_policy(policy_, policy_spec_, current_obs_);
        int action = env_steps_ < config_.warmup_steps ? uniform_action() : dist.sample(act_rng_);

        EnvStep step = env.step(action);
        Transition t;
        t.state.assign(current_obs_.data(), current_obs_.data() + current_obs_.size());
        t.action = action;
        t.reward = step.reward;
        t.next_state.assign(step.observation.data(),
                            step.observation.data() + step.observation.size());
        t.done = step.done && !step.truncated;  // truncation bootstraps
        t.behavior_entropy = dist.entropy();
        buffer_.push(t);

        episode_return_ += step.reward;
        ++env_steps_;
        if (step.episode_over()) {
            completed.push_back(episode_return_);
            episode_active_ = false;
        } else {
            current_obs_ = step.observation;
        }
    }
    return completed;
}

bool Agent::ready_to_train() const {
    return env_steps_ >= config_.warmup_steps &&
           buffer_.size() >= static_cast<std::size_t>(config_.batch_size);
}

StepMetrics Agent::train_step() {
    if (buffer_.size() < static_cast<std::size_t>(config_.batch_size))
        throw std::runtime_error("Agent::train_step: buffer smaller than batch_size");
    if (env_steps_ < config_.warmup_steps)
        throw std::runtime_error("Agent::train_step: still in warmup");

    Batch batch = buffer_.sample(config_.batch_size, buffer_rng_.next_u64());
    const double alpha = alpha_param_.alpha();

    CriticTargetBatch targets =
        critic_target(batch, target1_, target2_, critic_spec_, policy_, policy_spec_, alpha,
                      config_.gamma, config_.variant.target_rule);

    StepMetrics metrics;
    {
        Tape tape;
        Value loss = critic_loss(tape, critic1_, target1_, critic_spec_, batch, targets,
                                 config_.variant.q_clip);
        critic1_.zero_grad();
        tape.backward(loss);
        if (config_.lr_critic > 0.0) opt_critic1_.step(critic1_, config_.grad_clip_norm);
        metrics.critic_loss1 = tape.scalar(loss);
    }
    {
        Tape tape;
        Value loss = critic_loss(tape, critic2_, target2_, critic_spec_, batch, targets,
                                 config_.variant.q_clip);
        critic2_.zero_grad();
        tape.backward(loss);
        if (config_.lr_critic > 0.0) opt_critic2_.step(critic2_, config_.grad_clip_norm);
        metrics.critic_loss2 = tape.scalar(loss);
    }
    {
        Tape tape;
        Value loss = policy_loss(tape, policy_, critic1_, critic2_, policy_spec_, critic_spec_,
                                 batch, alpha, config_.variant.entropy_penalty_beta,
                                 config_.policy_q_rule);
        policy_.zero_grad();
        tape.backward(loss);
        if (config_.lr_policy > 0.0) opt_policy_.step(policy_, config_.grad_clip_norm);
        metrics.policy_loss = tape.scalar(loss);
    }
    {
        Tape tape;
        Value loss =
            temperature_loss(tape, alpha_param_, batch, policy_, policy_spec_, target_entropy_);
        alpha_param_.params.zero_grad();
        tape.backward(loss);
        if (config_.lr_alpha > 0.0) opt_alpha_.step(alpha_param_.params);
    }

    ++train_steps_;
    if (train_steps_ % config_.target_update_interval == 0) {
        polyak_update(target1_, critic1_, config_.tau);
        polyak_update(target2_, critic2_, config_.tau);
    }

    // Post-update temperature and batch entropy, consistent with each other.
    metrics.alpha = alpha_param_.alpha();
    Matrix logp = forward_policy_logp_batch(policy_, policy_spec_, batch.states);
    Matrix probs = logp.array().exp().matrix();
    metrics.batch_entropy_mean = -(probs.array() * logp.array()).rowwise().sum().mean();
    double y_sum = 0.0;
    for (double y : targets.y) y_sum += y;
    metrics.y_mean = y_sum / targets.y.size();
    return metrics;
}

EvalResult Agent::evaluate(EnvInterface& env, int num_episodes, std::uint64_t seed) const {
    if (num_episodes < 1) throw std::invalid_argument("Agent::evaluate: num_episodes must be >= 1");
    if (env.observation_dim() != obs_dim_ || env.num_actions() != num_actions_)
        throw std::invalid_argument("Agent::evaluate: environment shape mismatch");

    EvalResult out;
    out.returns.reserve(num_episodes);
    for (int ep = 0; ep < num_episodes; ++ep) {
        Vector obs = env.reset(derive_seed(seed, "eval_episode", static_cast<std::uint64_t>(ep)));
        double ret = 0.0;
        while (true) {
            CategoricalDistribution dist = forward_policy(policy_, policy_spec_, obs);
            EnvStep step = env.step(dist.argmax());
            ret += step.reward;
            if (step.episode_over()) break;
            obs = step.observation;
        }
        out.returns.push_back(ret);
    }
    double mean = 0.0;
    for (double r : out.returns) mean += r;
    mean /= out.returns.size();
    double var = 0.0;
    for (double r : out.returns) var += (r - mean) * (r - mean);
    out.mean = mean;
    out.std_dev = out.returns.size() > 1 ? std::sqrt(var / (out.returns.size() - 1)) : 0.0;
    return out;
}

}  // namespace sacd
