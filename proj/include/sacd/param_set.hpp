#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sacd/types.hpp"

namespace sacd {

/// One named parameter tensor with a gradient slot of identical shape.
/// Shapes are one- or two-dimensional; 1-D tensors are stored as 1 x n.
struct NamedTensor {
    std::string name;
    std::vector<long> shape;
    Matrix value;
    Matrix grad;
};

/// Flat, ordered collection of named tensors for one approximator.
class ParamSet {
public:
    /// Adds a zero-initialized tensor; shape must have one or two dimensions.
    NamedTensor& add(const std::string& name, std::vector<long> shape);

    NamedTensor& at(const std::string& name);
    const NamedTensor& at(const std::string& name) const;
    bool contains(const std::string& name) const;

    std::vector<NamedTensor>& tensors() { return tensors_; }
    const std::vector<NamedTensor>& tensors() const { return tensors_; }

    std::size_t parameter_count() const;

    void zero_grad();

    /// Max absolute difference over all value entries; shapes must match.
    double max_abs_diff(const ParamSet& other) const;

private:
    std::vector<NamedTensor> tensors_;
};

/// Checkpoint format: <prefix>.json holds {version, spec, tensors:[{name,
/// shape, offset, count}]}; <prefix>.bin is the concatenation of all tensor
/// values as little-endian IEEE-754 doubles in manifest order. Round-trips
/// are bit-exact. `spec_json` is an opaque description of the approximator
/// (serialized MlpSpec for networks) echoed back on load.
void save_checkpoint(const ParamSet& params, const std::string& spec_json,
                     const std::filesystem::path& prefix);

struct LoadedCheckpoint {
    ParamSet params;
    std::string spec_json;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& prefix);

}  // namespace sacd
