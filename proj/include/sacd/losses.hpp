#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sacd/distribution.hpp"
#include "sacd/mlp.hpp"
#include "sacd/optimizer.hpp"
#include "sacd/tape.hpp"
#include "sacd/transition.hpp"

namespace sacd {

/// Critic bootstrap rule: elementwise min of the two target critics
/// (vanilla clipped double Q-learning), the first target critic alone, or
/// the elementwise mean (double average Q-learning).
enum class TargetRule { kClippedMin, kSingle, kAverage };

std::string target_rule_name(TargetRule rule);
TargetRule target_rule_from_name(const std::string& name);

/// Which combination of the two online critics the policy objective sees.
enum class PolicyQRule { kMin, kFirst, kAverage };

std::string policy_q_rule_name(PolicyQRule rule);
PolicyQRule policy_q_rule_from_name(const std::string& name);

/// Algorithm-variant switches. (kClippedMin, none, none) is vanilla discrete
/// SAC; (kAverage, c, beta) is the full improved method.
struct LossVariant {
    TargetRule target_rule = TargetRule::kClippedMin;
    std::optional<double> q_clip;                // clip range c > 0
    std::optional<double> entropy_penalty_beta;  // beta >= 0

    void validate() const;
    std::string to_json() const;
    static LossVariant from_json(const std::string& text);
};

/// Soft bellman targets, one per batch element: y = r for terminal
/// transitions, exactly.
struct CriticTargetBatch {
    std::vector<double> y;
};

/// Soft state value V = sum_a pi(a) * (Q(a) - alpha * ln pi(a)), the exact
/// closed-form expectation over the categorical support.
double soft_state_value(std::span<const double> q_values, const CategoricalDistribution& dist,
                        double alpha);

/// y_i = r_i + (1 - done_i) * gamma * V(s'_i), where V combines the two
/// target critics per `rule` and uses the current policy at s'. Carries no
/// gradient into any parameter.
CriticTargetBatch critic_target(const Batch& batch, const ParamSet& target1,
                                const ParamSet& target2, const MlpSpec& critic_spec,
                                const ParamSet& policy, const MlpSpec& policy_spec, double alpha,
                                double gamma, TargetRule rule);

/// Soft bellman error for one critic, gathered at the stored actions:
/// mean of 0.5 * (Q(s,a) - y)^2. With `q_clip` = c, each element becomes
/// 0.5 * max((Q-y)^2, (Q' + clip(Q-Q', -c, c) - y)^2), where Q' is the
/// critic's target network and carries no gradient. The 0.5 factor applies
/// to both branches so the c -> infinity limit recovers the unclipped loss.
Value critic_loss(Tape& tape, ParamSet& online_i, ParamSet& target_i, const MlpSpec& spec,
                  const Batch& batch, const CriticTargetBatch& targets,
                  std::optional<double> q_clip);

/// Policy objective: mean over the batch of
///   sum_a pi(a|s) * (alpha * ln pi(a|s) - Q(s,a))
/// with Q the combination of the two online critics per `q_rule`, treated as
/// constant with respect to the policy. With `entropy_penalty_beta` = beta,
/// adds beta * 0.5 * mean((H_behavior - H(pi(.|s)))^2) where H_behavior is
/// the entropy stored in each transition at collection time.
Value policy_loss(Tape& tape, ParamSet& policy, ParamSet& online1, ParamSet& online2,
                  const MlpSpec& policy_spec, const MlpSpec& critic_spec, const Batch& batch,
                  double alpha, std::optional<double> entropy_penalty_beta,
                  PolicyQRule q_rule = PolicyQRule::kMin);

/// Temperature objective: mean of alpha * (H(pi(.|s)) - target_entropy),
/// with the exact policy entropy treated as constant w.r.t. log_alpha.
Value temperature_loss(Tape& tape, AlphaParam& alpha_param, const Batch& batch, ParamSet& policy,
                       const MlpSpec& policy_spec, double target_entropy);

/// Discrete-action default target entropy: 0.98 * ln(num_actions).
double default_target_entropy(int num_actions);

}  // namespace sacd
