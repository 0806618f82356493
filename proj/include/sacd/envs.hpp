#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <utility>

#include "sacd/env.hpp"

namespace sacd {

/// Sparse-reward chain: states 0..N-1 in a line, start at 0, terminal goal at
/// N-1. Action 1 (right) advances but slips one step back with probability
/// slip_prob; action 0 (left) retreats deterministically. Every step pays
/// step_penalty; arriving at the goal additionally pays goal_reward.
struct SparseChainSpec {
    int length = 10;             // N >= 3
    double step_penalty = -0.01;  // <= 0
    double goal_reward = 1.0;     // > 0
    int max_episode_steps = 200;
    double slip_prob = 0.0;  // in [0, 1)
    double gamma = 0.99;

    void validate() const;
};

struct BuiltEnv {
    std::unique_ptr<TabularEnv> env;
    TabularMDP mdp;
};

BuiltEnv make_chain(const SparseChainSpec& spec);

/// Deterministic four-action gridworld (0=up, 1=down, 2=left, 3=right).
/// Bumping a wall cell or the boundary is a no-op that still pays
/// step_penalty; entering the goal pays step_penalty + goal_reward and ends
/// the episode. Construction fails if the goal is unreachable from start.
struct GridworldSpec {
    int width = 5;
    int height = 5;
    std::set<std::pair<int, int>> walls;  // (x, y) blocked cells
    std::pair<int, int> start{0, 0};
    std::pair<int, int> goal{4, 4};
    double step_penalty = -0.01;
    double goal_reward = 1.0;
    int max_episode_steps = 100;
    double gamma = 0.99;

    void validate() const;
};

BuiltEnv make_gridworld(const GridworldSpec& spec);

/// Seeded random MDP: transition rows drawn from a flat Dirichlet, rewards
/// zero with probability reward_sparsity and otherwise uniform in [-1, 1].
/// No terminal states; the environment truncates at max_episode_steps.
struct RandomMdpSpec {
    int num_states = 5;
    int num_actions = 3;
    double reward_sparsity = 0.5;  // in [0, 1]
    std::uint64_t seed = 0;
    double gamma = 0.95;
    int max_episode_steps = 400;

    void validate() const;
};

BuiltEnv make_random_mdp(const RandomMdpSpec& spec);

}  // namespace sacd
