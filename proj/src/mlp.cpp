#include "sacd/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "sacd/rng.hpp"

namespace sacd {

using nlohmann::json;

void MlpSpec::validate() const {
    if (input_dim < 1) throw std::invalid_argument("MlpSpec: input_dim must be >= 1");
    if (output_dim < 1) throw std::invalid_argument("MlpSpec: output_dim must be >= 1");
    for (long h : hidden_dims)
        if (h < 1) throw std::invalid_argument("MlpSpec: hidden dims must be >= 1");
}

std::string MlpSpec::to_json() const {
    json j;
    j["input_dim"] = input_dim;
    j["hidden_dims"] = hidden_dims;
    j["output_dim"] = output_dim;
    j["activation"] = activation == Activation::kRelu ? "relu" : "tanh";
    return j.dump();
}

MlpSpec MlpSpec::from_json(const std::string& text) {
    json j = json::parse(text);
    MlpSpec spec;
    spec.input_dim = j.at("input_dim").get<long>();
    spec.hidden_dims = j.at("hidden_dims").get<std::vector<long>>();
    spec.output_dim = j.at("output_dim").get<long>();
    std::string act = j.at("activation").get<std::string>();
    if (act == "relu")
        spec.activation = Activation::kRelu;
    else if (act == "tanh")
        spec.activation = Activation::kTanh;
    else
        throw std::invalid_argument("MlpSpec: unknown activation " + act);
    spec.validate();
    return spec;
}

ParamSet mlp_init(const MlpSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    ParamSet params;
    long in_dim = spec.input_dim;
    std::vector<long> dims = spec.hidden_dims;
    dims.push_back(spec.output_dim);
    for (std::size_t layer = 0; layer < dims.size(); ++layer) {
        long out_dim = dims[layer];
        double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
        NamedTensor& w = params.add("w" + std::to_string(layer), {in_dim, out_dim});
        for (Eigen::Index c = 0; c < w.value.cols(); ++c)
            for (Eigen::Index r = 0; r < w.value.rows(); ++r)
                w.value(r, c) = rng.uniform(-bound, bound);
        NamedTensor& b = params.add("b" + std::to_string(layer), {out_dim});
        for (Eigen::Index c = 0; c < b.value.cols(); ++c) b.value(0, c) = rng.uniform(-bound, bound);
        in_dim = out_dim;
    }
    return params;
}

Value mlp_forward(Tape& tape, ParamSet& params, const MlpSpec& spec, Value input) {
    if (tape.value(input).cols() != spec.input_dim)
        throw std::invalid_argument("mlp_forward: input has dimension " +
                                    std::to_string(tape.value(input).cols()) + ", expected " +
                                    std::to_string(spec.input_dim));
    std::size_t num_layers = spec.hidden_dims.size() + 1;
    Value h = input;
    for (std::size_t layer = 0; layer < num_layers; ++layer) {
        Value w = tape.leaf(params, "w" + std::to_string(layer));
        Value b = tape.leaf(params, "b" + std::to_string(layer));
        h = tape.add(tape.matmul(h, w), b);
        if (layer + 1 < num_layers)
            h = spec.activation == Activation::kRelu ? tape.relu(h) : tape.tanh(h);
    }
    return h;
}

namespace {

Matrix forward_batch_raw(const ParamSet& params, const MlpSpec& spec, const Matrix& states) {
    Tape tape;
    // The tape binds non-const ParamSets; it only reads values here and
    // backward() is never invoked on this tape.
    Value out = mlp_forward(tape, const_cast<ParamSet&>(params), spec, tape.constant(states));
    return tape.value(out);
}

}  // namespace

Vector forward_q(const ParamSet& params, const MlpSpec& spec, const Vector& state) {
    if (state.size() != spec.input_dim)
        throw std::invalid_argument("forward_q: state dimension mismatch");
    Matrix out = forward_batch_raw(params, spec, state.transpose());
    return out.row(0).transpose();
}

Matrix forward_q_batch(const ParamSet& params, const MlpSpec& spec, const Matrix& states) {
    return forward_batch_raw(params, spec, states);
}

CategoricalDistribution forward_policy(const ParamSet& params, const MlpSpec& spec,
                                       const Vector& state) {
    if (state.size() != spec.input_dim)
        throw std::invalid_argument("forward_policy: state dimension mismatch");
    Matrix logp = forward_policy_logp_batch(params, spec, state.transpose());
    CategoricalDistribution d;
    d.probs.resize(logp.cols());
    d.log_probs.resize(logp.cols());
    for (Eigen::Index a = 0; a < logp.cols(); ++a) {
        d.log_probs[a] = logp(0, a);
        d.probs[a] = std::exp(logp(0, a));
    }
    return d;
}

Matrix forward_policy_logp_batch(const ParamSet& params, const MlpSpec& spec,
                                 const Matrix& states) {
    Tape tape;
    Value logits = mlp_forward(tape, const_cast<ParamSet&>(params), spec, tape.constant(states));
    Value logp = tape.log_softmax_rows(logits);
    return tape.value(logp);
}

}  // namespace sacd
