#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "sacd/mdp.hpp"
#include "sacd/rng.hpp"
#include "sacd/types.hpp"

namespace sacd {

/// Result of one environment step. `done` means a genuine terminal state was
/// reached; `truncated` means the episode hit its step limit. Bootstrapping
/// must ignore truncation.
struct EnvStep {
    Vector observation;
    double reward = 0.0;
    bool done = false;
    bool truncated = false;

    bool episode_over() const { return done || truncated; }
};

/// Behavioral contract shared by all built-in environments. Instances are
/// single-threaded; create one per worker.
class EnvInterface {
public:
    virtual ~EnvInterface() = default;
    virtual Vector reset(std::uint64_t seed) = 0;
    virtual EnvStep step(int action) = 0;
    virtual int num_actions() const = 0;
    virtual int observation_dim() const = 0;
};

/// Generic environment driven by an exact TabularMDP. Observations are
/// one-hot state indicators. An optional per-(s,a,s') reward tensor lets
/// sampled rewards depend on the landing state while the MDP's R[s][a]
/// stores the expectation.
class TabularEnv : public EnvInterface {
public:
    TabularEnv(TabularMDP mdp, int max_episode_steps,
               std::vector<Matrix> reward_on_arrival = {});

    Vector reset(std::uint64_t seed) override;
    EnvStep step(int action) override;
    int num_actions() const override { return mdp_.num_actions; }
    int observation_dim() const override { return mdp_.num_states; }

    const TabularMDP& mdp() const { return mdp_; }
    int max_episode_steps() const { return max_episode_steps_; }
    int current_state() const;

    /// Drops the agent into an arbitrary state mid-episode (test hook for
    /// transition-frequency checks).
    void set_state(int s);

private:
    Vector one_hot(int s) const;

    TabularMDP mdp_;
    int max_episode_steps_;
    std::vector<Matrix> reward_on_arrival_;  // [s](a, s'), empty = use R[s][a]
    std::optional<Rng> rng_;
    int state_ = -1;
    int steps_ = 0;
    bool needs_reset_ = true;
};

}  // namespace sacd
