#include "sacd/replay_buffer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sacd {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int num_actions, int obs_dim)
    : capacity_(capacity), num_actions_(num_actions), obs_dim_(obs_dim) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    if (num_actions <= 0) throw std::invalid_argument("ReplayBuffer: num_actions must be positive");
    if (obs_dim <= 0) throw std::invalid_argument("ReplayBuffer: obs_dim must be positive");
    storage_.reserve(capacity);
}

ReplayBuffer::ReplayBuffer(const ReplayBuffer& other)
    : capacity_(other.capacity_), num_actions_(other.num_actions_), obs_dim_(other.obs_dim_) {
    std::lock_guard<std::mutex> lock(other.mutex_);
    storage_ = other.storage_;
    next_ = other.next_;
    size_ = other.size_;
}

ReplayBuffer& ReplayBuffer::operator=(const ReplayBuffer& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mutex_, other.mutex_);
    capacity_ = other.capacity_;
    num_actions_ = other.num_actions_;
    obs_dim_ = other.obs_dim_;
    storage_ = other.storage_;
    next_ = other.next_;
    size_ = other.size_;
    return *this;
}

void ReplayBuffer::push(const Transition& t) {
    if (t.action < 0 || t.action >= num_actions_)
        throw std::invalid_argument("ReplayBuffer: action index " + std::to_string(t.action) +
                                    " out of range [0," + std::to_string(num_actions_) + ")");
    if (static_cast<int>(t.state.size()) != obs_dim_ ||
        static_cast<int>(t.next_state.size()) != obs_dim_)
        throw std::invalid_argument("ReplayBuffer: observation dimension mismatch");
    const double max_entropy = std::log(static_cast<double>(num_actions_));
    if (!(t.behavior_entropy >= -1e-9 && t.behavior_entropy <= max_entropy + 1e-9))
        throw std::invalid_argument("ReplayBuffer: behavior_entropy outside [0, ln(num_actions)]");

    std::lock_guard<std::mutex> lock(mutex_);
    if (storage_.size() < capacity_) {
        storage_.push_back(t);
    } else {
        storage_[next_] = t;
    }
    next_ = (next_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
}

Batch ReplayBuffer::sample(int batch_size, std::uint64_t seed) const {
    Rng rng(seed);
    return sample(batch_size, rng);
}

Batch ReplayBuffer::sample(int batch_size, Rng& rng) const {
    if (batch_size < 1) throw std::invalid_argument("ReplayBuffer: batch_size must be >= 1");
    std::lock_guard<std::mutex> lock(mutex_);
    if (size_ == 0) throw std::runtime_error("ReplayBuffer: cannot sample from an empty buffer");

    Batch b;
    b.states.resize(batch_size, obs_dim_);
    b.next_states.resize(batch_size, obs_dim_);
    b.actions.resize(batch_size);
    b.rewards.resize(batch_size);
    b.done.resize(batch_size);
    b.behavior_entropy.resize(batch_size);
    for (int i = 0; i < batch_size; ++i) {
        const Transition& t = storage_[rng.uniform_index(size_)];
        for (int d = 0; d < obs_dim_; ++d) {
            b.states(i, d) = t.state[d];
            b.next_states(i, d) = t.next_state[d];
        }
        b.actions[i] = t.action;
        b.rewards[i] = t.reward;
        b.done[i] = t.done ? 1 : 0;
        b.behavior_entropy[i] = t.behavior_entropy;
    }
    return b;
}

std::size_t ReplayBuffer::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return size_;
}

std::vector<Transition> ReplayBuffer::snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<Transition> out;
    out.reserve(size_);
    if (size_ < capacity_) {
        out.assign(storage_.begin(), storage_.begin() + size_);
    } else {
        // Ring is full: oldest entry sits at the cursor.
        for (std::size_t i = 0; i < size_; ++i) out.push_back(storage_[(next_ + i) % capacity_]);
    }
    return out;
}

}  // namespace sacd
