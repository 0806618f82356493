#include "sacd/losses.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace sacd {

using nlohmann::json;

std::string target_rule_name(TargetRule rule) {
    switch (rule) {
        case TargetRule::kClippedMin: return "clipped_min";
        case TargetRule::kSingle: return "single";
        case TargetRule::kAverage: return "average";
    }
    throw std::logic_error("unreachable");
}

TargetRule target_rule_from_name(const std::string& name) {
    if (name == "clipped_min") return TargetRule::kClippedMin;
    if (name == "single") return TargetRule::kSingle;
    if (name == "average") return TargetRule::kAverage;
    throw std::invalid_argument("unknown target_rule: " + name);
}

std::string policy_q_rule_name(PolicyQRule rule) {
    switch (rule) {
        case PolicyQRule::kMin: return "min";
        case PolicyQRule::kFirst: return "first";
        case PolicyQRule::kAverage: return "average";
    }
    throw std::logic_error("unreachable");
}

PolicyQRule policy_q_rule_from_name(const std::string& name) {
    if (name == "min") return PolicyQRule::kMin;
    if (name == "first") return PolicyQRule::kFirst;
    if (name == "average") return PolicyQRule::kAverage;
    throw std::invalid_argument("unknown policy_q_rule: " + name);
}

void LossVariant::validate() const {
    if (q_clip && !(*q_clip > 0.0))
        throw std::invalid_argument("LossVariant: q_clip must be strictly positive");
    if (entropy_penalty_beta && !(*entropy_penalty_beta >= 0.0))
        throw std::invalid_argument("LossVariant: entropy_penalty_beta must be >= 0");
}

std::string LossVariant::to_json() const {
    json j;
    j["target_rule"] = target_rule_name(target_rule);
    j["q_clip"] = q_clip ? json(*q_clip) : json(nullptr);
    j["entropy_penalty_beta"] = entropy_penalty_beta ? json(*entropy_penalty_beta) : json(nullptr);
    return j.dump();
}

LossVariant LossVariant::from_json(const std::string& text) {
    json j = json::parse(text);
    LossVariant v;
    v.target_rule = target_rule_from_name(j.at("target_rule").get<std::string>());
    if (!j.at("q_clip").is_null()) v.q_clip = j.at("q_clip").get<double>();
    if (!j.at("entropy_penalty_beta").is_null())
        v.entropy_penalty_beta = j.at("entropy_penalty_beta").get<double>();
    v.validate();
    return v;
}

double soft_state_value(std::span<const double> q_values, const CategoricalDistribution& dist,
                        double alpha) {
    if (q_values.size() != dist.probs.size())
        throw std::invalid_argument("soft_state_value: Q vector and policy length mismatch");
    double v = 0.0;
    for (std::size_t a = 0; a < q_values.size(); ++a) {
        double p = dist.probs[a];
        if (p > 0.0) v += p * (q_values[a] - alpha * dist.log_probs[a]);
    }
    return v;
}

namespace {

/// Combines two target-critic outputs per the bootstrap rule.
Matrix combine_targets(const Matrix& q1, const Matrix& q2, TargetRule rule) {
    switch (rule) {
        case TargetRule::kClippedMin: return q1.cwiseMin(q2);
        case TargetRule::kSingle: return q1;
        case TargetRule::kAverage: return 0.5 * (q1 + q2);
    }
    throw std::logic_error("unreachable");
}

}  // namespace

CriticTargetBatch critic_target(const Batch& batch, const ParamSet& target1,
                                const ParamSet& target2, const MlpSpec& critic_spec,
                                const ParamSet& policy, const MlpSpec& policy_spec, double alpha,
                                double gamma, TargetRule rule) {
    if (batch.size() == 0) throw std::invalid_argument("critic_target: empty batch");
    Matrix logp = forward_policy_logp_batch(policy, policy_spec, batch.next_states);
    Matrix probs = logp.array().exp().matrix();
    Matrix q1 = forward_q_batch(target1, critic_spec, batch.next_states);
    Matrix q2 = forward_q_batch(target2, critic_spec, batch.next_states);
    Matrix qc = combine_targets(q1, q2, rule);

    CriticTargetBatch out;
    out.y.resize(batch.size());
    for (int i = 0; i < batch.size(); ++i) {
        if (batch.done[i]) {
            out.y[i] = batch.rewards[i];
            continue;
        }
        // V(s') = sum_a pi(a|s') * (Qc(s',a) - alpha * ln pi(a|s')), exactly.
        double v = 0.0;
        for (Eigen::Index a = 0; a < probs.cols(); ++a) {
            double p = probs(i, a);
            if (p > 0.0) v += p * (qc(i, a) - alpha * logp(i, a));
        }
        out.y[i] = batch.rewards[i] + gamma * v;
    }
    return out;
}

Value critic_loss(Tape& tape, ParamSet& online_i, ParamSet& target_i, const MlpSpec& spec,
                  const Batch& batch, const CriticTargetBatch& targets,
                  std::optional<double> q_clip) {
    if (static_cast<int>(targets.y.size()) != batch.size())
        throw std::invalid_argument("critic_loss: targets not computed for this batch");
    if (q_clip && !(*q_clip > 0.0)) throw std::invalid_argument("critic_loss: q_clip must be > 0");

    Matrix y_col(batch.size(), 1);
    for (int i = 0; i < batch.size(); ++i) y_col(i, 0) = targets.y[i];
    Value y = tape.constant(std::move(y_col));

    Value q_all = mlp_forward(tape, online_i, spec, tape.constant(batch.states));
    Value q_sa = tape.gather_cols(q_all, batch.actions);
    Value err_sq = tape.square(tape.sub(q_sa, y));

    if (!q_clip) return tape.scale(tape.mean_all(err_sq), 0.5);

    // Target-anchored clipped estimate; the target-network term carries no
    // gradient.
    Value qp_all = mlp_forward(tape, target_i, spec, tape.constant(batch.states));
    Value qp_sa = tape.stop_grad(tape.gather_cols(qp_all, batch.actions));
    Value delta = tape.sub(q_sa, qp_sa);
    Value clipped = tape.add(qp_sa, tape.clip(delta, -*q_clip, *q_clip));
    Value clipped_sq = tape.square(tape.sub(clipped, y));
    return tape.scale(tape.mean_all(tape.max(err_sq, clipped_sq)), 0.5);
}

Value policy_loss(Tape& tape, ParamSet& policy, ParamSet& online1, ParamSet& online2,
                  const MlpSpec& policy_spec, const MlpSpec& critic_spec, const Batch& batch,
                  double alpha, std::optional<double> entropy_penalty_beta, PolicyQRule q_rule) {
    if (batch.size() == 0) throw std::invalid_argument("policy_loss: empty batch");
    if (entropy_penalty_beta && !(*entropy_penalty_beta >= 0.0))
        throw std::invalid_argument("policy_loss: entropy_penalty_beta must be >= 0");
    if (entropy_penalty_beta &&
        static_cast<int>(batch.behavior_entropy.size()) != batch.size())
        throw std::invalid_argument(
            "policy_loss: entropy penalty requires behavior_entropy on every transition");

    Value states = tape.constant(batch.states);
    Value logits = mlp_forward(tape, policy, policy_spec, states);
    Value logp = tape.log_softmax_rows(logits);
    Value probs = tape.exp(logp);

    // Critic values are constants with respect to the policy parameters.
    Value q1 = mlp_forward(tape, online1, critic_spec, states);
    Value q2 = mlp_forward(tape, online2, critic_spec, states);
    Value q;
    switch (q_rule) {
        case PolicyQRule::kMin: q = tape.min(q1, q2); break;
        case PolicyQRule::kFirst: q = q1; break;
        case PolicyQRule::kAverage: q = tape.scale(tape.add(q1, q2), 0.5); break;
    }
    q = tape.stop_grad(q);

    Value inner = tape.sub(tape.scale(logp, alpha), q);
    Value per_state = tape.sum_rows(tape.mul(probs, inner));  // batch x 1
    Value base = tape.mean_all(per_state);
    return entropy_penalty_beta
               ? [&] {
                     Matrix h_old(batch.size(), 1);
                     for (int i = 0; i < batch.size(); ++i) h_old(i, 0) = batch.behavior_entropy[i];
                     Value neg_h = tape.sum_rows(tape.mul(probs, logp));  // -H(pi), rowwise
                     Value h = tape.scale(neg_h, -1.0);
                     Value gap = tape.sub(tape.constant(std::move(h_old)), h);
                     Value penalty = tape.scale(tape.mean_all(tape.square(gap)),
                                                0.5 * *entropy_penalty_beta);
                     return tape.add(base, penalty);
                 }()
               : base;
}

Value temperature_loss(Tape& tape, AlphaParam& alpha_param, const Batch& batch, ParamSet& policy,
                       const MlpSpec& policy_spec, double target_entropy) {
    if (batch.size() == 0) throw std::invalid_argument("temperature_loss: empty batch");
    Value logits = mlp_forward(tape, policy, policy_spec, tape.constant(batch.states));
    Value logp = tape.log_softmax_rows(logits);
    Value probs = tape.exp(logp);
    // Entropy is a constant with respect to log_alpha.
    Value h = tape.stop_grad(tape.scale(tape.sum_rows(tape.mul(probs, logp)), -1.0));
    Value log_alpha = tape.leaf(alpha_param.params, "log_alpha");
    Value alpha = tape.exp(log_alpha);
    return tape.mean_all(tape.mul(tape.add_scalar(h, -target_entropy), alpha));
}

double default_target_entropy(int num_actions) {
    if (num_actions < 2)
        throw std::invalid_argument("default_target_entropy: num_actions must be >= 2");
    return 0.98 * std::log(static_cast<double>(num_actions));
}

}  // namespace sacd
