#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sacd/param_set.hpp"
#include "sacd/types.hpp"

namespace sacd {

class Tape;

/// Handle to a node on a Tape. Valid only for the tape that produced it.
struct Value {
    int id = -1;
};

/// Reverse-mode autodiff over a fixed vocabulary of matrix operations:
/// matmul, add/sub (with row and scalar broadcast), elementwise mul, scale,
/// relu, tanh, exp, square, row-wise log-softmax, gather, row sums, full
/// mean, elementwise min/max, clip and stop_grad. Leaves bind to ParamSet
/// tensors; backward() accumulates exact derivatives into their grad slots.
///
/// A tape records one forward evaluation and supports one backward pass.
/// Build a fresh tape per loss evaluation.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Leaf bound to a parameter tensor. Gradients reach the ParamSet on
    /// backward(); the tensor value is captured by copy at record time.
    Value leaf(ParamSet& params, const std::string& name);

    /// Leaf for every tensor in `params`, returned in storage order.
    std::vector<Value> leaves(ParamSet& params);

    Value constant(Matrix v);
    Value constant_scalar(double v);

    Value matmul(Value a, Value b);
    /// b may share a's shape, be a 1 x n row (broadcast over rows), or 1 x 1.
    Value add(Value a, Value b);
    Value sub(Value a, Value b);
    /// Hadamard product; either side may be 1 x 1 (scalar broadcast).
    Value mul(Value a, Value b);
    Value scale(Value a, double c);
    Value add_scalar(Value a, double c);
    Value relu(Value a);
    Value tanh(Value a);
    Value exp(Value a);
    Value square(Value a);
    /// Numerically stable log-softmax applied to each row.
    Value log_softmax_rows(Value a);
    /// Picks column `indices[i]` of row i; result is m x 1.
    Value gather_cols(Value a, const std::vector<int>& indices);
    Value sum_rows(Value a);
    Value mean_all(Value a);
    Value min(Value a, Value b);
    Value max(Value a, Value b);
    Value clip(Value a, double lo, double hi);
    /// Identity on values; blocks gradient flow entirely.
    Value stop_grad(Value a);

    const Matrix& value(Value v) const;
    /// Scalar convenience for 1 x 1 nodes.
    double scalar(Value v) const;

    /// Reverse pass from a scalar root. Flushes leaf gradients into their
    /// bound ParamSets (accumulating). Throws if nothing was recorded or the
    /// root is not 1 x 1. One backward per tape.
    void backward(Value root);

    int size() const { return static_cast<int>(nodes_.size()); }

private:
    struct Node {
        Matrix value;
        Matrix grad;  // allocated lazily during backward
        bool requires_grad = false;
        std::function<void(Tape&, int)> back;  // accumulates into parents
        ParamSet* bound_params = nullptr;
        int bound_index = -1;
    };

    int push(Matrix value, bool requires_grad, std::function<void(Tape&, int)> back);
    Node& node(Value v);
    const Node& node(Value v) const;
    void accumulate(int id, const Matrix& g);
    bool needs_grad(Value v) const { return node(v).requires_grad; }

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

}  // namespace sacd
