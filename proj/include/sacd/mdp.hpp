#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sacd/types.hpp"

namespace sacd {

/// Exact specification of a finite MDP: transition tensor P[s][a][s'],
/// state-action reward R[s][a], initial state distribution, terminal mask and
/// discount. This is what the dynamic-programming oracles operate on.
struct TabularMDP {
    int num_states = 0;
    int num_actions = 0;
    double gamma = 0.0;
    std::vector<Matrix> transition;  // one (num_actions x num_states) matrix per state
    Matrix reward;                   // num_states x num_actions
    std::vector<double> initial_dist;
    std::vector<bool> terminal;

    double p(int s, int a, int s2) const { return transition[s](a, s2); }
    double r(int s, int a) const { return reward(s, a); }

    /// Checks every structural invariant; throws std::invalid_argument naming
    /// the first violated one. Row sums must be 1 within 1e-9; terminal states
    /// must self-loop with reward 0.
    void validate() const;
};

/// Serializes to the documented JSON layout: {"num_states", "num_actions",
/// "gamma", "transition", "reward", "initial_dist", "terminal"}.
std::string mdp_to_json(const TabularMDP& mdp);

/// Parses and validates; reports the first violated invariant on failure.
TabularMDP mdp_from_json(const std::string& text);

void save_mdp(const TabularMDP& mdp, const std::filesystem::path& path);
TabularMDP load_mdp(const std::filesystem::path& path);

}  // namespace sacd
