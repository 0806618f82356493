#include "sacd/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace sacd {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) +
                                    "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                    "x" + std::to_string(b.cols()) + ")");
}

bool is_scalar(const Matrix& m) { return m.rows() == 1 && m.cols() == 1; }

}  // namespace

int Tape::push(Matrix value, bool requires_grad, std::function<void(Tape&, int)> back) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

Tape::Node& Tape::node(Value v) {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument("Tape: value handle does not belong to this tape");
    return nodes_[v.id];
}

const Tape::Node& Tape::node(Value v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument("Tape: value handle does not belong to this tape");
    return nodes_[v.id];
}

void Tape::accumulate(int id, const Matrix& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    n.grad += g;
}

Value Tape::leaf(ParamSet& params, const std::string& name) {
    const auto& tensors = params.tensors();
    int index = -1;
    for (std::size_t i = 0; i < tensors.size(); ++i)
        if (tensors[i].name == name) index = static_cast<int>(i);
    if (index < 0) throw std::out_of_range("Tape::leaf: no tensor named " + name);
    int id = push(tensors[index].value, true, nullptr);
    nodes_[id].bound_params = &params;
    nodes_[id].bound_index = index;
    return Value{id};
}

std::vector<Value> Tape::leaves(ParamSet& params) {
    std::vector<Value> out;
    out.reserve(params.tensors().size());
    for (const auto& t : params.tensors()) out.push_back(leaf(params, t.name));
    return out;
}

Value Tape::constant(Matrix v) { return Value{push(std::move(v), false, nullptr)}; }

Value Tape::constant_scalar(double v) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return constant(std::move(m));
}

Value Tape::matmul(Value a, Value b) {
    const Matrix& av = node(a).value;
    const Matrix& bv = node(b).value;
    if (av.cols() != bv.rows())
        throw std::invalid_argument("matmul: inner dimension mismatch (" + std::to_string(av.cols()) +
                                    " vs " + std::to_string(bv.rows()) + ")");
    Matrix out = av * bv;
    int ai = a.id, bi = b.id;
    return Value{push(std::move(out), needs_grad(a) || needs_grad(b), [ai, bi](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        if (t.nodes_[ai].requires_grad) t.accumulate(ai, g * t.nodes_[bi].value.transpose());
        if (t.nodes_[bi].requires_grad) t.accumulate(bi, t.nodes_[ai].value.transpose() * g);
    })};
}

Value Tape::add(Value a, Value b) {
    const Matrix& av = node(a).value;
    const Matrix& bv = node(b).value;
    if (is_scalar(av) && !is_scalar(bv)) return add(b, a);

    enum class Mode { Same, Row, Scalar };
    Mode mode;
    Matrix out;
    if (is_scalar(bv) && !is_scalar(av)) {
        mode = Mode::Scalar;
        out = (av.array() + bv(0, 0)).matrix();
    } else if (bv.rows() == 1 && av.rows() > 1 && bv.cols() == av.cols()) {
        mode = Mode::Row;
        out = av.rowwise() + bv.row(0);
    } else {
        check_same_shape(av, bv, "add");
        mode = Mode::Same;
        out = av + bv;
    }
    int ai = a.id, bi = b.id;
    return Value{push(std::move(out), needs_grad(a) || needs_grad(b), [ai, bi, mode](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        t.accumulate(ai, g);
        if (!t.nodes_[bi].requires_grad) return;
        if (mode == Mode::Same) {
            t.accumulate(bi, g);
        } else if (mode == Mode::Row) {
            t.accumulate(bi, g.colwise().sum());
        } else {
            Matrix s(1, 1);
            s(0, 0) = g.sum();
            t.accumulate(bi, s);
        }
    })};
}

Value Tape::sub(Value a, Value b) { return add(a, scale(b, -1.0)); }

Value Tape::mul(Value a, Value b) {
    const Matrix& av = node(a).value;
    const Matrix& bv = node(b).value;
    if (is_scalar(av) && !is_scalar(bv)) return mul(b, a);
    bool scalar_b = is_scalar(bv) && !is_scalar(av);
    Matrix out = scalar_b ? Matrix(av * bv(0, 0)) : [&] {
        check_same_shape(av, bv, "mul");
        return Matrix(av.cwiseProduct(bv));
    }();
    int ai = a.id, bi = b.id;
    return Value{push(std::move(out), needs_grad(a) || needs_grad(b),
                      [ai, bi, scalar_b](Tape& t, int self) {
                          const Matrix& g = t.nodes_[self].grad;
                          const Matrix& av2 = t.nodes_[ai].value;
                          const Matrix& bv2 = t.nodes_[bi].value;
                          if (scalar_b) {
                              if (t.nodes_[ai].requires_grad) t.accumulate(ai, g * bv2(0, 0));
                              if (t.nodes_[bi].requires_grad) {
                                  Matrix s(1, 1);
                                  s(0, 0) = g.cwiseProduct(av2).sum();
                                  t.accumulate(bi, s);
                              }
                          } else {
                              if (t.nodes_[ai].requires_grad) t.accumulate(ai, g.cwiseProduct(bv2));
                              if (t.nodes_[bi].requires_grad) t.accumulate(bi, g.cwiseProduct(av2));
                          }
                      })};
}

Value Tape::scale(Value a, double c) {
    int ai = a.id;
    return Value{push(node(a).value * c, needs_grad(a), [ai, c](Tape& t, int self) {
        t.accumulate(ai, t.nodes_[self].grad * c);
    })};
}

Value Tape::add_scalar(Value a, double c) {
    int ai = a.id;
    return Value{push((node(a).value.array() + c).matrix(), needs_grad(a), [ai](Tape& t, int self) {
        t.accumulate(ai, t.nodes_[self].grad);
    })};
}

Value Tape::relu(Value a) {
    int ai = a.id;
    return Value{push(node(a).value.cwiseMax(0.0), needs_grad(a), [ai](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        const Matrix& v = t.nodes_[ai].value;
        Matrix mask = (v.array() > 0.0).cast<double>().matrix();
        t.accumulate(ai, g.cwiseProduct(mask));
    })};
}

Value Tape::tanh(Value a) {
    int ai = a.id;
    return Value{push(node(a).value.array().tanh().matrix(), needs_grad(a), [ai](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        const Matrix& y = t.nodes_[self].value;
        Matrix dv = (g.array() * (1.0 - y.array().square())).matrix();
        t.accumulate(ai, dv);
    })};
}

Value Tape::exp(Value a) {
    int ai = a.id;
    return Value{push(node(a).value.array().exp().matrix(), needs_grad(a), [ai](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        const Matrix& y = t.nodes_[self].value;
        t.accumulate(ai, g.cwiseProduct(y));
    })};
}

Value Tape::square(Value a) {
    int ai = a.id;
    return Value{push(node(a).value.array().square().matrix(), needs_grad(a), [ai](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        const Matrix& v = t.nodes_[ai].value;
        t.accumulate(ai, 2.0 * g.cwiseProduct(v));
    })};
}

Value Tape::log_softmax_rows(Value a) {
    const Matrix& av = node(a).value;
    Matrix out(av.rows(), av.cols());
    for (Eigen::Index i = 0; i < av.rows(); ++i) {
        double m = av.row(i).maxCoeff();
        double lse = std::log((av.row(i).array() - m).exp().sum());
        out.row(i) = (av.row(i).array() - m - lse).matrix();
    }
    int ai = a.id;
    return Value{push(std::move(out), needs_grad(a), [ai](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        const Matrix& y = t.nodes_[self].value;  // log-probs
        Matrix soft = y.array().exp().matrix();
        Vector row_sums = g.rowwise().sum();
        Matrix weighted = (soft.array().colwise() * row_sums.array()).matrix();
        t.accumulate(ai, g - weighted);
    })};
}

Value Tape::gather_cols(Value a, const std::vector<int>& indices) {
    const Matrix& av = node(a).value;
    if (static_cast<Eigen::Index>(indices.size()) != av.rows())
        throw std::invalid_argument("gather_cols: one index per row required");
    Matrix out(av.rows(), 1);
    for (Eigen::Index i = 0; i < av.rows(); ++i) {
        int j = indices[i];
        if (j < 0 || j >= av.cols()) throw std::invalid_argument("gather_cols: index out of range");
        out(i, 0) = av(i, j);
    }
    int ai = a.id;
    std::vector<int> idx = indices;
    return Value{push(std::move(out), needs_grad(a), [ai, idx](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        const Matrix& v = t.nodes_[ai].value;
        Matrix dx = Matrix::Zero(v.rows(), v.cols());
        for (Eigen::Index i = 0; i < v.rows(); ++i) dx(i, idx[i]) = g(i, 0);
        t.accumulate(ai, dx);
    })};
}

Value Tape::sum_rows(Value a) {
    int ai = a.id;
    return Value{push(node(a).value.rowwise().sum(), needs_grad(a), [ai](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;  // m x 1
        const Matrix& v = t.nodes_[ai].value;
        t.accumulate(ai, g * Matrix::Ones(1, v.cols()));
    })};
}

Value Tape::mean_all(Value a) {
    const Matrix& av = node(a).value;
    Matrix out(1, 1);
    out(0, 0) = av.mean();
    int ai = a.id;
    return Value{push(std::move(out), needs_grad(a), [ai](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        const Matrix& v = t.nodes_[ai].value;
        double w = g(0, 0) / static_cast<double>(v.size());
        t.accumulate(ai, Matrix::Constant(v.rows(), v.cols(), w));
    })};
}

Value Tape::min(Value a, Value b) {
    const Matrix& av = node(a).value;
    const Matrix& bv = node(b).value;
    check_same_shape(av, bv, "min");
    int ai = a.id, bi = b.id;
    return Value{push(av.cwiseMin(bv), needs_grad(a) || needs_grad(b), [ai, bi](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        const Matrix& av2 = t.nodes_[ai].value;
        const Matrix& bv2 = t.nodes_[bi].value;
        // Ties route to the first argument.
        Matrix mask = (av2.array() <= bv2.array()).cast<double>().matrix();
        if (t.nodes_[ai].requires_grad) t.accumulate(ai, g.cwiseProduct(mask));
        if (t.nodes_[bi].requires_grad)
            t.accumulate(bi, g.cwiseProduct((1.0 - mask.array()).matrix()));
    })};
}

Value Tape::max(Value a, Value b) {
    const Matrix& av = node(a).value;
    const Matrix& bv = node(b).value;
    check_same_shape(av, bv, "max");
    int ai = a.id, bi = b.id;
    return Value{push(av.cwiseMax(bv), needs_grad(a) || needs_grad(b), [ai, bi](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        const Matrix& av2 = t.nodes_[ai].value;
        const Matrix& bv2 = t.nodes_[bi].value;
        Matrix mask = (av2.array() >= bv2.array()).cast<double>().matrix();
        if (t.nodes_[ai].requires_grad) t.accumulate(ai, g.cwiseProduct(mask));
        if (t.nodes_[bi].requires_grad)
            t.accumulate(bi, g.cwiseProduct((1.0 - mask.array()).matrix()));
    })};
}

Value Tape::clip(Value a, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("clip: lo must be < hi");
    int ai = a.id;
    return Value{push(node(a).value.cwiseMax(lo).cwiseMin(hi), needs_grad(a),
                      [ai, lo, hi](Tape& t, int self) {
                          const Matrix& g = t.nodes_[self].grad;
                          const Matrix& v = t.nodes_[ai].value;
                          Matrix mask =
                              ((v.array() > lo) && (v.array() < hi)).cast<double>().matrix();
                          t.accumulate(ai, g.cwiseProduct(mask));
                      })};
}

Value Tape::stop_grad(Value a) { return Value{push(node(a).value, false, nullptr)}; }

const Matrix& Tape::value(Value v) const { return node(v).value; }

double Tape::scalar(Value v) const {
    const Matrix& m = node(v).value;
    if (m.rows() != 1 || m.cols() != 1) throw std::invalid_argument("Tape::scalar: node is not 1x1");
    return m(0, 0);
}

void Tape::backward(Value root) {
    if (nodes_.empty()) throw std::logic_error("Tape::backward: no forward evaluation recorded");
    if (backward_done_) throw std::logic_error("Tape::backward: tape already consumed");
    Node& r = node(root);
    if (r.value.rows() != 1 || r.value.cols() != 1)
        throw std::invalid_argument("Tape::backward: root must be a scalar");
    backward_done_ = true;
    // A loss with no parameter dependence has identically zero gradients.
    if (!r.requires_grad) return;
    r.grad = Matrix::Ones(1, 1);
    for (int i = root.id; i >= 0; --i) {
        Node& n = nodes_[i];
        if (!n.requires_grad || n.grad.size() == 0) continue;
        if (n.back) n.back(*this, i);
        if (n.bound_params) {
            NamedTensor& t = n.bound_params->tensors()[n.bound_index];
            t.grad += n.grad;
        }
    }
}

}  // namespace sacd
