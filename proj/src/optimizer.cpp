#include "sacd/optimizer.hpp"

#include <stdexcept>

#include "sacd/errors.hpp"

namespace sacd {

Optimizer::Optimizer(OptimizerRule rule, double lr, AdamConfig adam)
    : rule_(rule), lr_(lr), adam_(adam) {
    if (!(lr > 0.0)) throw std::invalid_argument("Optimizer: learning rate must be > 0");
}

void Optimizer::step(ParamSet& params, std::optional<double> grad_clip_norm) {
    auto& tensors = params.tensors();
    for (const auto& t : tensors) {
        if (!t.grad.allFinite())
            throw NanAbortError("non-finite gradient in tensor '" + t.name + "'");
    }

    double clip_scale = 1.0;
    if (grad_clip_norm) {
        if (!(*grad_clip_norm > 0.0))
            throw std::invalid_argument("Optimizer: grad_clip_norm must be > 0");
        double sq = 0.0;
        for (const auto& t : tensors) sq += t.grad.squaredNorm();
        double norm = std::sqrt(sq);
        if (norm > *grad_clip_norm) clip_scale = *grad_clip_norm / norm;
    }

    if (rule_ == OptimizerRule::kSgd) {
        ++t_;
        for (auto& t : tensors) t.value -= lr_ * clip_scale * t.grad;
        return;
    }

    if (m_.size() != tensors.size()) {
        m_.assign(tensors.size(), Matrix());
        v_.assign(tensors.size(), Matrix());
        for (std::size_t i = 0; i < tensors.size(); ++i) {
            m_[i] = Matrix::Zero(tensors[i].value.rows(), tensors[i].value.cols());
            v_[i] = Matrix::Zero(tensors[i].value.rows(), tensors[i].value.cols());
        }
    }
    ++t_;
    double bc1 = 1.0 - std::pow(adam_.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(adam_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        Matrix g = tensors[i].grad * clip_scale;
        m_[i] = adam_.beta1 * m_[i] + (1.0 - adam_.beta1) * g;
        v_[i] = (adam_.beta2 * v_[i].array() + (1.0 - adam_.beta2) * g.array().square()).matrix();
        Matrix m_hat = m_[i] / bc1;
        Matrix v_hat = v_[i] / bc2;
        tensors[i].value -=
            (lr_ * m_hat.array() / (v_hat.array().sqrt() + adam_.epsilon)).matrix();
    }
}

void polyak_update(ParamSet& target, const ParamSet& online, double tau) {
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("polyak_update: tau must be in (0,1]");
    auto& dst = target.tensors();
    const auto& src = online.tensors();
    if (dst.size() != src.size())
        throw std::invalid_argument("polyak_update: tensor count mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i) {
        if (dst[i].value.rows() != src[i].value.rows() || dst[i].value.cols() != src[i].value.cols())
            throw std::invalid_argument("polyak_update: shape mismatch at tensor " + dst[i].name);
        dst[i].value = (1.0 - tau) * dst[i].value + tau * src[i].value;
    }
}

}  // namespace sacd
