#pragma once

#include <cstdint>

#include "sacd/env.hpp"
#include "sacd/losses.hpp"
#include "sacd/mlp.hpp"
#include "sacd/oracles.hpp"

namespace sacd {

/// Q-estimation bias of a pair of critics against the exact soft Q of the
/// frozen policy. Biases are weighted by visitation(s) * pi(a|s) with
/// terminal states excluded (their Q is identically zero and never used).
struct BiasReport {
    double mean_bias = 0.0;          // combined estimate, weighted mean
    Matrix per_state_action_bias;    // combined estimate minus q_true
    double sign_summary = 0.0;       // weighted fraction of (s,a) with negative bias
    double per_critic_mean_bias[2] = {0.0, 0.0};
    double q_estimate_mean = 0.0;    // weighted mean of the combined estimate
    double q_true_mean = 0.0;
};

/// Evaluates both critics on every one-hot state of a tabular MDP, computes
/// the exact soft Q under `policy` (at temperature `alpha`) and reports the
/// estimation bias of each critic and of the combined estimate selected by
/// `rule` (min / first / mean, mirroring the bootstrap rules). For the
/// average rule the combined bias is the arithmetic mean of the per-critic
/// biases at every (s,a), exactly.
BiasReport measure_bias(const ParamSet& critic1, const ParamSet& critic2,
                        const MlpSpec& critic_spec, const TabularPolicy& policy, TargetRule rule,
                        const TabularMDP& mdp, double alpha, const Vector& visitation);

/// On-policy state-visitation frequencies estimated from rollouts: counts
/// every state at which an action is taken over `num_steps` steps. Requires
/// a tabular (one-hot observation) environment.
Vector estimate_visitation(EnvInterface& env, const PolicyFn& policy, long num_steps,
                           std::uint64_t seed);

/// Uniform weight over non-terminal states (the `uniform` weighting flag for
/// bias reports).
Vector uniform_visitation(const TabularMDP& mdp);

/// Cosine similarity of two visitation histograms. Errors on zero vectors
/// or mismatched dimensions.
double state_distribution_similarity(const Vector& hist_a, const Vector& hist_b);

/// (agent - random) / (reference - random); may exceed 1 or be negative.
double normalized_score(double agent, double random_baseline, double reference);

/// Extracts the tabular policy of an MLP over all one-hot states.
TabularPolicy extract_tabular_policy(const ParamSet& policy_params, const MlpSpec& policy_spec,
                                     int num_states);

}  // namespace sacd
