#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sacd/rng.hpp"

namespace sacd {

/// Categorical distribution over a discrete action set. Stores both probs and
/// their natural logs; probabilities of exactly zero carry log_prob = -inf.
struct CategoricalDistribution {
    std::vector<double> probs;
    std::vector<double> log_probs;

    CategoricalDistribution() = default;

    /// Builds from probabilities, filling log_probs. Validates the simplex
    /// constraint (sum 1 within 1e-6, entries in [0,1]).
    static CategoricalDistribution from_probs(std::vector<double> p) {
        CategoricalDistribution d;
        double sum = 0.0;
        for (double v : p) {
            if (!(v >= 0.0) || v > 1.0 + 1e-12)
                throw std::invalid_argument("CategoricalDistribution: probability out of [0,1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw std::invalid_argument("CategoricalDistribution: probabilities do not sum to 1");
        d.log_probs.reserve(p.size());
        for (double v : p)
            d.log_probs.push_back(v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity());
        d.probs = std::move(p);
        return d;
    }

    int num_actions() const { return static_cast<int>(probs.size()); }

    /// Shannon entropy in nats, with the 0*log(0) = 0 convention.
    double entropy() const {
        double h = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i)
            if (probs[i] > 0.0) h -= probs[i] * log_probs[i];
        return h;
    }

    int sample(Rng& rng) const { return rng.categorical(probs); }

    /// Highest-probability action; ties break to the lowest index.
    int argmax() const {
        int best = 0;
        for (std::size_t i = 1; i < probs.size(); ++i)
            if (probs[i] > probs[best]) best = static_cast<int>(i);
        return best;
    }
};

/// Entropy of a categorical distribution (Shannon, nats).
inline double entropy(const CategoricalDistribution& dist) { return dist.entropy(); }

}  // namespace sacd
