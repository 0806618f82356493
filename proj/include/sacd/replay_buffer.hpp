#pragma once

#include <cstdint>
#include <mutex>
#include <vector>

#include "sacd/rng.hpp"
#include "sacd/transition.hpp"

namespace sacd {

/// Fixed-capacity ring buffer of transitions with uniform with-replacement
/// sampling. Push and sample are serialized internally, which covers the
/// one-writer/one-reader contract; everything stored is copied in and out by
/// value.
class ReplayBuffer {
public:
    /// `num_actions` and `obs_dim` pin the shape every pushed transition must
    /// have; violations are rejected at push time.
    ReplayBuffer(std::size_t capacity, int num_actions, int obs_dim);

    ReplayBuffer(const ReplayBuffer& other);
    ReplayBuffer& operator=(const ReplayBuffer& other);

    void push(const Transition& t);

    /// Uniform sampling with replacement; deterministic given (contents, seed).
    Batch sample(int batch_size, std::uint64_t seed) const;

    /// As above but draws indices from a caller-owned stream.
    Batch sample(int batch_size, Rng& rng) const;

    std::size_t size() const;
    std::size_t capacity() const { return capacity_; }
    int num_actions() const { return num_actions_; }
    int obs_dim() const { return obs_dim_; }

    /// Oldest-first copy of the live contents (test and diagnostics helper).
    std::vector<Transition> snapshot() const;

private:
    std::size_t capacity_;
    int num_actions_;
    int obs_dim_;
    std::vector<Transition> storage_;
    std::size_t next_ = 0;  // ring cursor
    std::size_t size_ = 0;
    mutable std::mutex mutex_;
};

}  // namespace sacd
