#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sacd/distribution.hpp"
#include "sacd/env.hpp"
#include "sacd/mdp.hpp"
#include "sacd/types.hpp"

namespace sacd {

/// Fixed-point iteration ran out of iterations; carries the last residual.
struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, double residual_)
        : std::runtime_error(what), residual(residual_) {}
    double residual;
};

/// Exact soft Q/V of a fixed policy. Terminal states carry zero value: an
/// episode ends on arrival, so no entropy bonus accrues there even though
/// the MDP encodes them as self-loops.
struct SoftEvalResult {
    Matrix q_true;   // num_states x num_actions
    Vector v_true;   // num_states
    long iterations = 0;
    double residual = 0.0;
};

/// Per-state policy as a row-stochastic matrix (num_states x num_actions).
using TabularPolicy = Matrix;

CategoricalDistribution policy_row(const TabularPolicy& policy, int state);

TabularPolicy uniform_policy(int num_states, int num_actions);

/// Fixed-point iteration Q <- R + gamma * P * V with
/// V(s) = sum_a pi(a|s)(Q(s,a) - alpha ln pi(a|s)), to sup-norm `tol`.
SoftEvalResult soft_policy_evaluation(const TabularMDP& mdp, const TabularPolicy& policy,
                                      double alpha, double tol = 1e-10, long max_iter = 1000000);

/// Soft-optimal fixed point: Q* via the log-sum-exp backup and the induced
/// softmax policy pi*(a|s) proportional to exp(Q*(s,a)/alpha).
struct SoftViResult {
    Matrix q_star;
    TabularPolicy policy;  // softmax of Q*/alpha
    long iterations = 0;
    double residual = 0.0;
};

SoftViResult soft_value_iteration(const TabularMDP& mdp, double alpha, double tol = 1e-10,
                                  long max_iter = 1000000);

/// E_{s0 ~ initial, a ~ pi}[Q(s0, a)] — the quantity the soft Monte-Carlo
/// return estimates (state entropy counted from t >= 1 only).
double expected_start_q(const TabularMDP& mdp, const Matrix& q, const TabularPolicy& policy);

/// A frozen stochastic policy as a function of the observation.
using PolicyFn = std::function<CategoricalDistribution(const Vector&)>;

PolicyFn tabular_policy_fn(const TabularPolicy& policy);

struct MonteCarloResult {
    double mean = 0.0;
    double std_error = 0.0;
    std::vector<double> returns;
};

/// Mean discounted return of `policy` over seeded episodes. With soft=true,
/// adds gamma^t * alpha * H(pi(.|s_t)) for every state from t >= 1 at which
/// an action is taken, making the estimate comparable to expected_start_q of
/// the soft evaluation oracle. Episodes run until the environment terminates
/// or truncates; for gamma < 1 the truncation tail is bounded by
/// gamma^max_steps times the value bound.
MonteCarloResult monte_carlo_return(EnvInterface& env, const PolicyFn& policy, int num_episodes,
                                    double gamma, bool soft, double alpha, std::uint64_t seed);

}  // namespace sacd
