#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "sacd/param_set.hpp"

namespace sacd {

enum class OptimizerRule { kSgd, kAdam };

/// Classic Adam constants.
struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Gradient-descent optimizer over one ParamSet: plain SGD or Adam.
/// step() consumes the gradients currently stored in the ParamSet. A NaN
/// gradient aborts with an error naming the offending tensor.
class Optimizer {
public:
    Optimizer(OptimizerRule rule, double lr, AdamConfig adam = {});

    /// Applies one update. `grad_clip_norm`, when set, rescales the gradient
    /// so its global L2 norm does not exceed the bound.
    void step(ParamSet& params, std::optional<double> grad_clip_norm = std::nullopt);

    double lr() const { return lr_; }
    long steps_taken() const { return t_; }

private:
    OptimizerRule rule_;
    double lr_;
    AdamConfig adam_;
    long t_ = 0;
    std::vector<Matrix> m_;  // first-moment estimates, lazily shaped
    std::vector<Matrix> v_;  // second-moment estimates
};

/// Temperature parameter in log space: alpha = exp(log_alpha) > 0 by
/// construction. Held as a one-tensor ParamSet so the same optimizer and
/// tape machinery apply.
struct AlphaParam {
    ParamSet params;

    explicit AlphaParam(double alpha_init = 1.0) {
        if (!(alpha_init > 0.0)) throw std::invalid_argument("AlphaParam: alpha_init must be > 0");
        params.add("log_alpha", {1}).value(0, 0) = std::log(alpha_init);
    }

    double log_alpha() const { return params.at("log_alpha").value(0, 0); }
    double alpha() const { return std::exp(log_alpha()); }
};

/// target <- (1 - tau) * target + tau * online, elementwise over all tensors.
void polyak_update(ParamSet& target, const ParamSet& online, double tau);

}  // namespace sacd
