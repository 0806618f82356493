#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sacd/env.hpp"
#include "sacd/losses.hpp"
#include "sacd/mlp.hpp"
#include "sacd/optimizer.hpp"
#include "sacd/replay_buffer.hpp"

namespace sacd {

/// Trainer hyperparameters. Desk-scale defaults; every field is exposed in
/// the JSON config schema.
struct AgentConfig {
    LossVariant variant;
    PolicyQRule policy_q_rule = PolicyQRule::kMin;
    double gamma = 0.99;
    double lr_critic = 3e-4;
    double lr_policy = 3e-4;
    double lr_alpha = 3e-4;
    double tau = 0.005;
    long target_update_interval = 1;
    int batch_size = 32;
    long warmup_steps = 1000;  // env steps of uniform-random collection
    long train_interval = 1;   // env steps per gradient step
    std::optional<double> target_entropy;  // nullopt = auto: 0.98 * ln(A)
    double alpha_init = 1.0;
    std::size_t buffer_capacity = 100000;
    std::vector<long> hidden_dims = {32};
    Activation activation = Activation::kRelu;
    OptimizerRule optimizer = OptimizerRule::kAdam;
    std::optional<double> grad_clip_norm;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class ActionMode { kStochastic, kDeterministic };

struct StepMetrics {
    double critic_loss1 = 0.0;
    double critic_loss2 = 0.0;
    double policy_loss = 0.0;
    double alpha = 0.0;
    double batch_entropy_mean = 0.0;
    double y_mean = 0.0;
};

struct EvalResult {
    double mean = 0.0;
    double std_dev = 0.0;
    std::vector<double> returns;
};

/// Soft policy iteration trainer: rollout collection into the replay buffer,
/// critic / policy / temperature updates in that order, and periodic polyak
/// synchronization of the target critics. All randomness derives from the
/// config seed through fixed labeled streams, so a full run is a pure
/// function of its configuration. Copying an Agent clones the entire
/// training state.
class Agent {
public:
    Agent(const AgentConfig& config, int obs_dim, int num_actions);

    /// Stochastic mode samples from pi(.|obs) with the agent's action stream;
    /// deterministic mode takes the argmax with lowest-index tie-breaking.
    int act(const Vector& obs, ActionMode mode);

    /// Runs the behavior policy for `num_steps` env steps (uniform random
    /// during warmup), pushing transitions with the current policy entropy
    /// attached. The same env instance must be passed across calls. Returns
    /// the undiscounted returns of episodes completed during the call.
    std::vector<double> collect(EnvInterface& env, long num_steps);

    /// One gradient update of both critics, the policy and the temperature,
    /// plus target sync every target_update_interval train steps.
    StepMetrics train_step();

    bool ready_to_train() const;

    /// Deterministic-policy episodes on a caller-provided env, seeded
    /// independently of training; training state is untouched.
    EvalResult evaluate(EnvInterface& env, int num_episodes, std::uint64_t seed) const;

    const AgentConfig& config() const { return config_; }
    double alpha() const { return alpha_param_.alpha(); }
    double target_entropy() const { return target_entropy_; }
    long env_steps() const { return env_steps_; }
    long train_steps() const { return train_steps_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    const MlpSpec& policy_spec() const { return policy_spec_; }
    const MlpSpec& critic_spec() const { return critic_spec_; }
    const ParamSet& policy_params() const { return policy_; }
    const ParamSet& critic_params(int i) const { return i == 0 ? critic1_ : critic2_; }
    const ParamSet& target_params(int i) const { return i == 0 ? target1_ : target2_; }

    /// Test hooks.
    ParamSet& mutable_policy() { return policy_; }
    ParamSet& mutable_critic(int i) { return i == 0 ? critic1_ : critic2_; }
    ReplayBuffer& mutable_buffer() { return buffer_; }

private:
    int uniform_action();
    void push_transition(const Vector& obs, int action, const EnvStep& step);

    AgentConfig config_;
    int obs_dim_;
    int num_actions_;
    MlpSpec policy_spec_;
    MlpSpec critic_spec_;
    double target_entropy_;

    ParamSet policy_;
    ParamSet critic1_, critic2_;
    ParamSet target1_, target2_;
    AlphaParam alpha_param_;
    Optimizer opt_policy_, opt_critic1_, opt_critic2_, opt_alpha_;
    ReplayBuffer buffer_;

    Rng act_rng_;     // behavior-policy sampling (and warmup actions)
    Rng buffer_rng_;  // per-step batch seeds
    Rng env_rng_;     // training-env reset seeds

    long env_steps_ = 0;
    long train_steps_ = 0;

    // Rollout context carried across collect() calls.
    bool episode_active_ = false;
    Vector current_obs_;
    double episode_return_ = 0.0;
};

}  // namespace sacd
