#include "sacd/env.hpp"

#include <stdexcept>
#include <string>

namespace sacd {

TabularEnv::TabularEnv(TabularMDP mdp, int max_episode_steps,
                       std::vector<Matrix> reward_on_arrival)
    : mdp_(std::move(mdp)),
      max_episode_steps_(max_episode_steps),
      reward_on_arrival_(std::move(reward_on_arrival)) {
    mdp_.validate();
    if (max_episode_steps_ < 1)
        throw std::invalid_argument("TabularEnv: max_episode_steps must be >= 1");
    if (!reward_on_arrival_.empty()) {
        if (static_cast<int>(reward_on_arrival_.size()) != mdp_.num_states)
            throw std::invalid_argument("TabularEnv: reward_on_arrival has wrong first dimension");
        // The MDP's R[s][a] must be the expectation of the sampled reward.
        for (int s = 0; s < mdp_.num_states; ++s) {
            if (reward_on_arrival_[s].rows() != mdp_.num_actions ||
                reward_on_arrival_[s].cols() != mdp_.num_states)
                throw std::invalid_argument("TabularEnv: reward_on_arrival shape mismatch");
            for (int a = 0; a < mdp_.num_actions; ++a) {
                double expect = 0.0;
                for (int s2 = 0; s2 < mdp_.num_states; ++s2)
                    expect += mdp_.transition[s](a, s2) * reward_on_arrival_[s](a, s2);
                if (std::abs(expect - mdp_.reward(s, a)) > 1e-9)
                    throw std::invalid_argument(
                        "TabularEnv: reward_on_arrival expectation disagrees with R at (" +
                        std::to_string(s) + "," + std::to_string(a) + ")");
            }
        }
    }
}

Vector TabularEnv::one_hot(int s) const {
    Vector v = Vector::Zero(mdp_.num_states);
    v(s) = 1.0;
    return v;
}

Vector TabularEnv::reset(std::uint64_t seed) {
    rng_.emplace(seed);
    state_ = rng_->categorical(mdp_.initial_dist);
    steps_ = 0;
    needs_reset_ = false;
    return one_hot(state_);
}

EnvStep TabularEnv::step(int action) {
    if (needs_reset_) throw std::logic_error("TabularEnv: step after episode end; reset first");
    if (action < 0 || action >= mdp_.num_actions)
        throw std::invalid_argument("TabularEnv: action index out of range");

    const Matrix& rows = mdp_.transition[state_];
    double u = rng_->uniform();
    int next = mdp_.num_states - 1;
    double acc = 0.0;
    for (int s2 = 0; s2 < mdp_.num_states; ++s2) {
        acc += rows(action, s2);
        if (u < acc) {
            next = s2;
            break;
        }
    }

    EnvStep out;
    out.reward = reward_on_arrival_.empty() ? mdp_.reward(state_, action)
                                            : reward_on_arrival_[state_](action, next);
    state_ = next;
    ++steps_;
    out.done = mdp_.terminal[state_];
    out.truncated = !out.done && steps_ >= max_episode_steps_;
    out.observation = one_hot(state_);
    needs_reset_ = out.episode_over();
    return out;
}

int TabularEnv::current_state() const {
    if (state_ < 0) throw std::logic_error("TabularEnv: not reset yet");
    return state_;
}

void TabularEnv::set_state(int s) {
    if (s < 0 || s >= mdp_.num_states)
        throw std::invalid_argument("TabularEnv: set_state index out of range");
    if (!rng_) rng_.emplace(0);
    state_ = s;
    steps_ = 0;
    needs_reset_ = false;
}

}  // namespace sacd
