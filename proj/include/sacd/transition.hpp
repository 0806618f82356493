#pragma once

#include <vector>

#include "sacd/types.hpp"

namespace sacd {

/// One replay record. `done` is the bootstrap mask: true only for genuine
/// terminal transitions, never for time-limit truncation. `behavior_entropy`
/// is the entropy of the full categorical policy at `state` at collection
/// time, in nats.
struct Transition {
    std::vector<double> state;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
    double behavior_entropy = 0.0;
};

/// A sampled minibatch laid out for batched forwards (one row per transition).
struct Batch {
    Matrix states;       // batch_size x obs_dim
    Matrix next_states;  // batch_size x obs_dim
    std::vector<int> actions;
    std::vector<double> rewards;
    std::vector<char> done;  // avoids vector<bool> proxy quirks
    std::vector<double> behavior_entropy;

    int size() const { return static_cast<int>(actions.size()); }
};

}  // namespace sacd
