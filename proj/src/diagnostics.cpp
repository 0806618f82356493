#include "sacd/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace sacd {

namespace {

Matrix identity_states(int num_states) { return Matrix::Identity(num_states, num_states); }

}  // namespace

TabularPolicy extract_tabular_policy(const ParamSet& policy_params, const MlpSpec& policy_spec,
                                     int num_states) {
    if (policy_spec.input_dim != num_states)
        throw std::invalid_argument(
            "extract_tabular_policy: environment is not tabular for this policy "
            "(one-hot observation dimension mismatch)");
    Matrix logp = forward_policy_logp_batch(policy_params, policy_spec, identity_states(num_states));
    return logp.array().exp().matrix();
}

BiasReport measure_bias(const ParamSet& critic1, const ParamSet& critic2,
                        const MlpSpec& critic_spec, const TabularPolicy& policy, TargetRule rule,
                        const TabularMDP& mdp, double alpha, const Vector& visitation) {
    if (critic_spec.input_dim != mdp.num_states)
        throw std::invalid_argument(
            "measure_bias: environment is not tabular for these critics (one-hot observation "
            "dimension mismatch)");
    if (visitation.size() != mdp.num_states)
        throw std::invalid_argument("measure_bias: visitation vector has wrong length");

    SoftEvalResult eval = soft_policy_evaluation(mdp, policy, alpha);
    Matrix q1 = forward_q_batch(critic1, critic_spec, identity_states(mdp.num_states));
    Matrix q2 = forward_q_batch(critic2, critic_spec, identity_states(mdp.num_states));
    Matrix eps1 = q1 - eval.q_true;
    Matrix eps2 = q2 - eval.q_true;

    BiasReport report;
    switch (rule) {
        case TargetRule::kClippedMin:
            // min(Q1,Q2) - T == min(Q1-T, Q2-T) exactly.
            report.per_state_action_bias = eps1.cwiseMin(eps2);
            break;
        case TargetRule::kSingle:
            report.per_state_action_bias = eps1;
            break;
        case TargetRule::kAverage:
            report.per_state_action_bias = 0.5 * (eps1 + eps2);
            break;
    }

    // Weight (s,a) by visitation(s) * pi(a|s), dropping terminal states.
    double total = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) {
        if (mdp.terminal[s]) continue;
        double w = visitation(s);
        if (!(w >= 0.0)) throw std::invalid_argument("measure_bias: negative visitation weight");
        total += w;
    }
    if (!(total > 0.0))
        throw std::invalid_argument("measure_bias: visitation places no mass on non-terminal states");

    double mean_bias = 0.0, mean_e1 = 0.0, mean_e2 = 0.0, neg_frac = 0.0;
    double mean_est = 0.0, mean_true = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) {
        if (mdp.terminal[s] || visitation(s) == 0.0) continue;
        double ws = visitation(s) / total;
        for (int a = 0; a < mdp.num_actions; ++a) {
            double w = ws * policy(s, a);
            double b = report.per_state_action_bias(s, a);
            mean_bias += w * b;
            mean_e1 += w * eps1(s, a);
            mean_e2 += w * eps2(s, a);
            if (b < 0.0) neg_frac += w;
            mean_est += w * (b + eval.q_true(s, a));
            mean_true += w * eval.q_true(s, a);
        }
    }
    report.mean_bias = mean_bias;
    report.per_critic_mean_bias[0] = mean_e1;
    report.per_critic_mean_bias[1] = mean_e2;
    report.sign_summary = neg_frac;
    report.q_estimate_mean = mean_est;
    report.q_true_mean = mean_true;
    return report;
}

Vector estimate_visitation(EnvInterface& env, const PolicyFn& policy, long num_steps,
                           std::uint64_t seed) {
    if (num_steps < 1) throw std::invalid_argument("estimate_visitation: num_steps must be >= 1");
    Rng rng(derive_seed(seed, "visitation_actions"));
    Vector counts = Vector::Zero(env.observation_dim());
    Vector obs;
    bool need_reset = true;
    std::uint64_t episode = 0;
    for (long t = 0; t < num_steps; ++t) {
        if (need_reset) {
            obs = env.reset(derive_seed(seed, "visitation_episode", episode++));
            need_reset = false;
        }
        Eigen::Index s;
        obs.maxCoeff(&s);
        counts(s) += 1.0;
        CategoricalDistribution dist = policy(obs);
        EnvStep step = env.step(dist.sample(rng));
        if (step.episode_over())
            need_reset = true;
        else
            obs = step.observation;
    }
    return counts / counts.sum();
}

Vector uniform_visitation(const TabularMDP& mdp) {
    int live = 0;
    for (int s = 0; s < mdp.num_states; ++s)
        if (!mdp.terminal[s]) ++live;
    if (live == 0) throw std::invalid_argument("uniform_visitation: all states terminal");
    Vector v = Vector::Zero(mdp.num_states);
    for (int s = 0; s < mdp.num_states; ++s)
        if (!mdp.terminal[s]) v(s) = 1.0 / live;
    return v;
}

double state_distribution_similarity(const Vector& hist_a, const Vector& hist_b) {
    if (hist_a.size() != hist_b.size())
        throw std::invalid_argument("state_distribution_similarity: dimension mismatch");
    double na = hist_a.norm(), nb = hist_b.norm();
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("state_distribution_similarity: zero histogram");
    return hist_a.dot(hist_b) / (na * nb);
}

double normalized_score(double agent, double random_baseline, double reference) {
    double denom = reference - random_baseline;
    if (denom == 0.0)
        throw std::invalid_argument("normalized_score: reference equals random baseline");
    return (agent - random_baseline) / denom;
}

}  // namespace sacd
