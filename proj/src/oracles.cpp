#include "sacd/oracles.hpp"

#include <cmath>
#include <limits>

namespace sacd {

CategoricalDistribution policy_row(const TabularPolicy& policy, int state) {
    std::vector<double> p(policy.cols());
    for (Eigen::Index a = 0; a < policy.cols(); ++a) p[a] = policy(state, a);
    return CategoricalDistribution::from_probs(std::move(p));
}

TabularPolicy uniform_policy(int num_states, int num_actions) {
    return Matrix::Constant(num_states, num_actions, 1.0 / num_actions);
}

namespace {

void check_policy(const TabularMDP& mdp, const TabularPolicy& policy) {
    if (policy.rows() != mdp.num_states || policy.cols() != mdp.num_actions)
        throw std::invalid_argument("policy matrix shape does not match the MDP");
    for (int s = 0; s < mdp.num_states; ++s) {
        double sum = 0.0;
        for (int a = 0; a < mdp.num_actions; ++a) {
            if (!(policy(s, a) >= 0.0)) throw std::invalid_argument("policy has negative entries");
            sum += policy(s, a);
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw std::invalid_argument("policy row " + std::to_string(s) + " does not sum to 1");
    }
}

/// V(s) from a Q table under pi, with terminal states pinned at zero.
Vector soft_values(const TabularMDP& mdp, const Matrix& q, const TabularPolicy& policy,
                   double alpha) {
    Vector v = Vector::Zero(mdp.num_states);
    for (int s = 0; s < mdp.num_states; ++s) {
        if (mdp.terminal[s]) continue;
        double acc = 0.0;
        for (int a = 0; a < mdp.num_actions; ++a) {
            double p = policy(s, a);
            if (p > 0.0) acc += p * (q(s, a) - alpha * std::log(p));
        }
        v(s) = acc;
    }
    return v;
}

Matrix backup(const TabularMDP& mdp, const Vector& v) {
    Matrix q = Matrix::Zero(mdp.num_states, mdp.num_actions);
    for (int s = 0; s < mdp.num_states; ++s) {
        if (mdp.terminal[s]) continue;
        for (int a = 0; a < mdp.num_actions; ++a) {
            double future = mdp.transition[s].row(a).dot(v);
            q(s, a) = mdp.reward(s, a) + mdp.gamma * future;
        }
    }
    return q;
}

}  // namespace

SoftEvalResult soft_policy_evaluation(const TabularMDP& mdp, const TabularPolicy& policy,
                                      double alpha, double tol, long max_iter) {
    mdp.validate();
    check_policy(mdp, policy);
    if (!(tol > 0.0)) throw std::invalid_argument("soft_policy_evaluation: tol must be > 0");

    SoftEvalResult out;
    out.q_true = Matrix::Zero(mdp.num_states, mdp.num_actions);
    double residual = std::numeric_limits<double>::infinity();
    for (long it = 0; it < max_iter; ++it) {
        Vector v = soft_values(mdp, out.q_true, policy, alpha);
        Matrix q_next = backup(mdp, v);
        residual = (q_next - out.q_true).cwiseAbs().maxCoeff();
        out.q_true = std::move(q_next);
        out.iterations = it + 1;
        if (residual < tol) {
            out.residual = residual;
            out.v_true = soft_values(mdp, out.q_true, policy, alpha);
            return out;
        }
    }
    throw ConvergenceError("soft_policy_evaluation: no fixed point within " +
                               std::to_string(max_iter) + " iterations (residual " +
                               std::to_string(residual) + ")",
                           residual);
}

SoftViResult soft_value_iteration(const TabularMDP& mdp, double alpha, double tol, long max_iter) {
    mdp.validate();
    if (!(alpha > 0.0)) throw std::invalid_argument("soft_value_iteration: alpha must be > 0");
    if (!(tol > 0.0)) throw std::invalid_argument("soft_value_iteration: tol must be > 0");

    SoftViResult out;
    out.q_star = Matrix::Zero(mdp.num_states, mdp.num_actions);
    double residual = std::numeric_limits<double>::infinity();
    for (long it = 0; it < max_iter; ++it) {
        // V(s) = alpha * logsumexp(Q(s,.)/alpha), stably via max subtraction.
        Vector v = Vector::Zero(mdp.num_states);
        for (int s = 0; s < mdp.num_states; ++s) {
            if (mdp.terminal[s]) continue;
            double m = out.q_star.row(s).maxCoeff();
            double sum = 0.0;
            for (int a = 0; a < mdp.num_actions; ++a)
                sum += std::exp((out.q_star(s, a) - m) / alpha);
            v(s) = m + alpha * std::log(sum);
        }
        Matrix q_next = backup(mdp, v);
        residual = (q_next - out.q_star).cwiseAbs().maxCoeff();
        out.q_star = std::move(q_next);
        out.iterations = it + 1;
        if (residual < tol) break;
        if (it + 1 == max_iter)
            throw ConvergenceError("soft_value_iteration: no fixed point within " +
                                       std::to_string(max_iter) + " iterations (residual " +
                                       std::to_string(residual) + ")",
                                   residual);
    }
    out.residual = residual;

    out.policy = Matrix::Zero(mdp.num_states, mdp.num_actions);
    for (int s = 0; s < mdp.num_states; ++s) {
        double m = out.q_star.row(s).maxCoeff();
        double sum = 0.0;
        for (int a = 0; a < mdp.num_actions; ++a) sum += std::exp((out.q_star(s, a) - m) / alpha);
        for (int a = 0; a < mdp.num_actions; ++a)
            out.policy(s, a) = std::exp((out.q_star(s, a) - m) / alpha) / sum;
    }
    return out;
}

double expected_start_q(const TabularMDP& mdp, const Matrix& q, const TabularPolicy& policy) {
    double acc = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) {
        if (mdp.initial_dist[s] == 0.0) continue;
        double per_state = 0.0;
        for (int a = 0; a < mdp.num_actions; ++a) per_state += policy(s, a) * q(s, a);
        acc += mdp.initial_dist[s] * per_state;
    }
    return acc;
}

PolicyFn tabular_policy_fn(const TabularPolicy& policy) {
    return [policy](const Vector& obs) {
        Eigen::Index s;
        obs.maxCoeff(&s);
        return policy_row(policy, static_cast<int>(s));
    };
}

MonteCarloResult monte_carlo_return(EnvInterface& env, const PolicyFn& policy, int num_episodes,
                                    double gamma, bool soft, double alpha, std::uint64_t seed) {
    if (num_episodes < 1)
        throw std::invalid_argument("monte_carlo_return: num_episodes must be >= 1");
    Rng rng(derive_seed(seed, "mc_actions"));

    MonteCarloResult out;
    out.returns.reserve(num_episodes);
    for (int ep = 0; ep < num_episodes; ++ep) {
        Vector obs = env.reset(derive_seed(seed, "mc_episode", static_cast<std::uint64_t>(ep)));
        double ret = 0.0;
        double discount = 1.0;
        long t = 0;
        while (true) {
            CategoricalDistribution dist = policy(obs);
            if (soft && t >= 1) ret += discount * alpha * dist.entropy();
            int action = dist.sample(rng);
            EnvStep step = env.step(action);
            ret += discount * step.reward;
            discount *= gamma;
            ++t;
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
    var = out.returns.size() > 1 ? var / (out.returns.size() - 1) : 0.0;
    out.mean = mean;
    out.std_error = std::sqrt(var / out.returns.size());
    return out;
}

}  // namespace sacd
