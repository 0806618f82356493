#include "sacd/envs.hpp"

#include <queue>
#include <stdexcept>

namespace sacd {

void SparseChainSpec::validate() const {
    if (length < 3) throw std::invalid_argument("SparseChainSpec: length must be >= 3");
    if (step_penalty > 0.0) throw std::invalid_argument("SparseChainSpec: step_penalty must be <= 0");
    if (!(goal_reward > 0.0)) throw std::invalid_argument("SparseChainSpec: goal_reward must be > 0");
    if (max_episode_steps < 1)
        throw std::invalid_argument("SparseChainSpec: max_episode_steps must be >= 1");
    if (!(slip_prob >= 0.0 && slip_prob < 1.0))
        throw std::invalid_argument("SparseChainSpec: slip_prob must lie in [0,1)");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("SparseChainSpec: gamma must lie in [0,1)");
}

BuiltEnv make_chain(const SparseChainSpec& spec) {
    spec.validate();
    const int n = spec.length;
    const int goal = n - 1;

    TabularMDP mdp;
    mdp.num_states = n;
    mdp.num_actions = 2;
    mdp.gamma = spec.gamma;
    mdp.transition.assign(n, Matrix::Zero(2, n));
    mdp.reward = Matrix::Zero(n, 2);
    mdp.initial_dist.assign(n, 0.0);
    mdp.initial_dist[0] = 1.0;
    mdp.terminal.assign(n, false);
    mdp.terminal[goal] = true;

    std::vector<Matrix> arrival(n, Matrix::Zero(2, n));
    auto arrival_reward = [&](int s2) {
        return spec.step_penalty + (s2 == goal ? spec.goal_reward : 0.0);
    };
    for (int s = 0; s < n; ++s) {
        if (s == goal) {
            mdp.transition[s](0, s) = 1.0;
            mdp.transition[s](1, s) = 1.0;
            continue;  // terminal self-loop, reward 0
        }
        const int back = std::max(s - 1, 0);
        // left: deterministic retreat
        mdp.transition[s](0, back) = 1.0;
        arrival[s](0, back) = arrival_reward(back);
        // right: advance, slipping back with slip_prob
        mdp.transition[s](1, s + 1) += 1.0 - spec.slip_prob;
        mdp.transition[s](1, back) += spec.slip_prob;
        arrival[s](1, s + 1) = arrival_reward(s + 1);
        arrival[s](1, back) = arrival_reward(back);
        for (int a = 0; a < 2; ++a) {
            double expect = 0.0;
            for (int s2 = 0; s2 < n; ++s2) expect += mdp.transition[s](a, s2) * arrival[s](a, s2);
            mdp.reward(s, a) = expect;
        }
    }
    mdp.validate();

    BuiltEnv out;
    out.env = std::make_unique<TabularEnv>(mdp, spec.max_episode_steps, std::move(arrival));
    out.mdp = std::move(mdp);
    return out;
}

void GridworldSpec::validate() const {
    if (width < 1 || height < 1)
        throw std::invalid_argument("GridworldSpec: width and height must be >= 1");
    auto in_bounds = [&](std::pair<int, int> c) {
        return c.first >= 0 && c.first < width && c.second >= 0 && c.second < height;
    };
    if (!in_bounds(start)) throw std::invalid_argument("GridworldSpec: start out of bounds");
    if (!in_bounds(goal)) throw std::invalid_argument("GridworldSpec: goal out of bounds");
    if (walls.count(start)) throw std::invalid_argument("GridworldSpec: start is a wall");
    if (walls.count(goal)) throw std::invalid_argument("GridworldSpec: goal is a wall");
    for (const auto& w : walls)
        if (!in_bounds(w)) throw std::invalid_argument("GridworldSpec: wall out of bounds");
    if (step_penalty > 0.0) throw std::invalid_argument("GridworldSpec: step_penalty must be <= 0");
    if (!(goal_reward > 0.0)) throw std::invalid_argument("GridworldSpec: goal_reward must be > 0");
    if (max_episode_steps < 1)
        throw std::invalid_argument("GridworldSpec: max_episode_steps must be >= 1");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("GridworldSpec: gamma must lie in [0,1)");
}

BuiltEnv make_gridworld(const GridworldSpec& spec) {
    spec.validate();
    const int w = spec.width, h = spec.height;
    const int n = w * h;
    auto index = [&](int x, int y) { return y * w + x; };
    const int start = index(spec.start.first, spec.start.second);
    const int goal = index(spec.goal.first, spec.goal.second);
    auto blocked = [&](int x, int y) {
        return x < 0 || x >= w || y < 0 || y >= h || spec.walls.count({x, y}) > 0;
    };

    // dx/dy per action: up, down, left, right (y grows downward).
    const int dx[4] = {0, 0, -1, 1};
    const int dy[4] = {-1, 1, 0, 0};

    // Reachability check from start, treating the goal as absorbing.
    {
        std::vector<bool> seen(n, false);
        std::queue<int> frontier;
        frontier.push(start);
        seen[start] = true;
        while (!frontier.empty()) {
            int s = frontier.front();
            frontier.pop();
            if (s == goal) break;
            int x = s % w, y = s / w;
            for (int a = 0; a < 4; ++a) {
                int nx = x + dx[a], ny = y + dy[a];
                if (blocked(nx, ny)) continue;
                int s2 = index(nx, ny);
                if (!seen[s2]) {
                    seen[s2] = true;
                    frontier.push(s2);
                }
            }
        }
        if (!seen[goal])
            throw std::invalid_argument("GridworldSpec: goal is unreachable from start");
    }

    TabularMDP mdp;
    mdp.num_states = n;
    mdp.num_actions = 4;
    mdp.gamma = spec.gamma;
    mdp.transition.assign(n, Matrix::Zero(4, n));
    mdp.reward = Matrix::Zero(n, 4);
    mdp.initial_dist.assign(n, 0.0);
    mdp.initial_dist[start] = 1.0;
    mdp.terminal.assign(n, false);
    mdp.terminal[goal] = true;

    for (int s = 0; s < n; ++s) {
        int x = s % w, y = s / w;
        if (s == goal || spec.walls.count({x, y})) {
            // Terminal goal and never-entered wall cells both self-loop.
            for (int a = 0; a < 4; ++a) mdp.transition[s](a, s) = 1.0;
            continue;
        }
        for (int a = 0; a < 4; ++a) {
            int nx = x + dx[a], ny = y + dy[a];
            int s2 = blocked(nx, ny) ? s : index(nx, ny);
            mdp.transition[s](a, s2) = 1.0;
            mdp.reward(s, a) = spec.step_penalty + (s2 == goal ? spec.goal_reward : 0.0);
        }
    }
    mdp.validate();

    BuiltEnv out;
    out.env = std::make_unique<TabularEnv>(mdp, spec.max_episode_steps);
    out.mdp = std::move(mdp);
    return out;
}

void RandomMdpSpec::validate() const {
    if (num_states < 2) throw std::invalid_argument("RandomMdpSpec: num_states must be >= 2");
    if (num_actions < 1) throw std::invalid_argument("RandomMdpSpec: num_actions must be >= 1");
    if (!(reward_sparsity >= 0.0 && reward_sparsity <= 1.0))
        throw std::invalid_argument("RandomMdpSpec: reward_sparsity must lie in [0,1]");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("RandomMdpSpec: gamma must lie in [0,1)");
    if (max_episode_steps < 1)
        throw std::invalid_argument("RandomMdpSpec: max_episode_steps must be >= 1");
}

BuiltEnv make_random_mdp(const RandomMdpSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const int n = spec.num_states, k = spec.num_actions;

    TabularMDP mdp;
    mdp.num_states = n;
    mdp.num_actions = k;
    mdp.gamma = spec.gamma;
    mdp.transition.assign(n, Matrix::Zero(k, n));
    mdp.reward = Matrix::Zero(n, k);
    mdp.initial_dist.assign(n, 1.0 / n);
    mdp.terminal.assign(n, false);

    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < k; ++a) {
            // Flat Dirichlet row via normalized exponentials.
            double total = 0.0;
            std::vector<double> e(n);
            for (int s2 = 0; s2 < n; ++s2) {
                e[s2] = rng.exponential();
                total += e[s2];
            }
            for (int s2 = 0; s2 < n; ++s2) mdp.transition[s](a, s2) = e[s2] / total;
            mdp.reward(s, a) = rng.uniform() < spec.reward_sparsity ? 0.0 : rng.uniform(-1.0, 1.0);
        }
    }
    // Normalized rows can drift a hair from 1; renormalize exactly.
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < k; ++a) mdp.transition[s].row(a) /= mdp.transition[s].row(a).sum();
    mdp.validate();

    BuiltEnv out;
    out.env = std::make_unique<TabularEnv>(mdp, spec.max_episode_steps);
    out.mdp = std::move(mdp);
    return out;
}

}  // namespace sacd
