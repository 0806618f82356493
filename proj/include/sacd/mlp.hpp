#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sacd/distribution.hpp"
#include "sacd/param_set.hpp"
#include "sacd/tape.hpp"
#include "sacd/types.hpp"

namespace sacd {

enum class Activation { kRelu, kTanh };

/// Architecture of a multilayer perceptron. An empty hidden_dims list gives
/// a plain linear model.
struct MlpSpec {
    long input_dim = 0;
    std::vector<long> hidden_dims;
    long output_dim = 0;
    Activation activation = Activation::kRelu;

    void validate() const;
    std::string to_json() const;
    static MlpSpec from_json(const std::string& text);
};

/// Fresh parameters for `spec`: weights "w0","b0","w1","b1",... with entries
/// uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], deterministically seeded.
ParamSet mlp_init(const MlpSpec& spec, std::uint64_t seed);

/// Records the forward pass on `tape`. `input` is batch x input_dim.
/// Returns the pre-activation output layer (batch x output_dim).
Value mlp_forward(Tape& tape, ParamSet& params, const MlpSpec& spec, Value input);

/// Q-network forward for one state: the vector of action values.
Vector forward_q(const ParamSet& params, const MlpSpec& spec, const Vector& state);

/// Batched Q forward (values only, no gradients): batch x num_actions.
Matrix forward_q_batch(const ParamSet& params, const MlpSpec& spec, const Matrix& states);

/// Policy forward for one state: softmax of the output logits, with
/// log-probabilities from a numerically stable log-softmax.
CategoricalDistribution forward_policy(const ParamSet& params, const MlpSpec& spec,
                                       const Vector& state);

/// Batched policy forward: returns row-wise log-probabilities.
Matrix forward_policy_logp_batch(const ParamSet& params, const MlpSpec& spec,
                                 const Matrix& states);

}  // namespace sacd
