#include "sacd/param_set.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sacd/errors.hpp"
#include "sacd/version.hpp"

namespace sacd {

using nlohmann::json;

namespace {

std::pair<long, long> matrix_dims(const std::vector<long>& shape) {
    if (shape.size() == 1) return {1, shape[0]};
    if (shape.size() == 2) return {shape[0], shape[1]};
    throw std::invalid_argument("ParamSet: tensors must have one or two dimensions");
}

}  // namespace

NamedTensor& ParamSet::add(const std::string& name, std::vector<long> shape) {
    if (contains(name)) throw std::invalid_argument("ParamSet: duplicate tensor name " + name);
    auto [rows, cols] = matrix_dims(shape);
    if (rows < 1 || cols < 1) throw std::invalid_argument("ParamSet: dimensions must be positive");
    NamedTensor t;
    t.name = name;
    t.shape = std::move(shape);
    t.value = Matrix::Zero(rows, cols);
    t.grad = Matrix::Zero(rows, cols);
    tensors_.push_back(std::move(t));
    return tensors_.back();
}

NamedTensor& ParamSet::at(const std::string& name) {
    for (auto& t : tensors_)
        if (t.name == name) return t;
    throw std::out_of_range("ParamSet: no tensor named " + name);
}

const NamedTensor& ParamSet::at(const std::string& name) const {
    for (const auto& t : tensors_)
        if (t.name == name) return t;
    throw std::out_of_range("ParamSet: no tensor named " + name);
}

bool ParamSet::contains(const std::string& name) const {
    return std::any_of(tensors_.begin(), tensors_.end(),
                       [&](const NamedTensor& t) { return t.name == name; });
}

std::size_t ParamSet::parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
    return n;
}

void ParamSet::zero_grad() {
    for (auto& t : tensors_) t.grad.setZero();
}

double ParamSet::max_abs_diff(const ParamSet& other) const {
    if (tensors_.size() != other.tensors_.size())
        throw std::invalid_argument("ParamSet: tensor count mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
        if (tensors_[i].value.rows() != other.tensors_[i].value.rows() ||
            tensors_[i].value.cols() != other.tensors_[i].value.cols())
            throw std::invalid_argument("ParamSet: shape mismatch at " + tensors_[i].name);
        m = std::max(m, (tensors_[i].value - other.tensors_[i].value).cwiseAbs().maxCoeff());
    }
    return m;
}

namespace {

void write_le_doubles(std::ofstream& out, const Matrix& m) {
    // Column-major traversal, explicit little-endian byte order.
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            std::uint64_t bits = std::bit_cast<std::uint64_t>(m(r, c));
            unsigned char bytes[8];
            for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
            out.write(reinterpret_cast<const char*>(bytes), 8);
        }
    }
}

double read_le_double(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (!in) throw IoError("checkpoint blob truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const ParamSet& params, const std::string& spec_json,
                     const std::filesystem::path& prefix) {
    json manifest;
    manifest["version"] = kArtifactFormatVersion;
    manifest["spec"] = spec_json.empty() ? json(nullptr) : json::parse(spec_json);
    json index = json::array();
    std::size_t offset = 0;
    for (const auto& t : params.tensors()) {
        json entry;
        entry["name"] = t.name;
        entry["shape"] = t.shape;
        entry["offset"] = offset;
        entry["count"] = static_cast<std::size_t>(t.value.size());
        offset += static_cast<std::size_t>(t.value.size());
        index.push_back(std::move(entry));
    }
    manifest["tensors"] = std::move(index);

    std::filesystem::path json_path = prefix;
    json_path += ".json";
    std::ofstream jf(json_path);
    if (!jf) throw IoError("cannot open " + json_path.string() + " for writing");
    jf << manifest.dump(2) << "\n";

    std::filesystem::path bin_path = prefix;
    bin_path += ".bin";
    std::ofstream bf(bin_path, std::ios::binary);
    if (!bf) throw IoError("cannot open " + bin_path.string() + " for writing");
    for (const auto& t : params.tensors()) write_le_doubles(bf, t.value);
    if (!bf) throw IoError("write failed for " + bin_path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& prefix) {
    std::filesystem::path json_path = prefix;
    json_path += ".json";
    std::ifstream jf(json_path);
    if (!jf) throw IoError("cannot open " + json_path.string());
    json manifest;
    try {
        jf >> manifest;
    } catch (const json::exception& e) {
        throw IoError("malformed checkpoint manifest: " + std::string(e.what()));
    }
    if (manifest.at("version").get<int>() != kArtifactFormatVersion)
        throw IoError("unsupported checkpoint version");

    LoadedCheckpoint out;
    if (!manifest.at("spec").is_null()) out.spec_json = manifest.at("spec").dump();

    std::filesystem::path bin_path = prefix;
    bin_path += ".bin";
    std::ifstream bf(bin_path, std::ios::binary);
    if (!bf) throw IoError("cannot open " + bin_path.string());
    for (const auto& entry : manifest.at("tensors")) {
        auto shape = entry.at("shape").get<std::vector<long>>();
        NamedTensor& t = out.params.add(entry.at("name").get<std::string>(), shape);
        for (Eigen::Index c = 0; c < t.value.cols(); ++c)
            for (Eigen::Index r = 0; r < t.value.rows(); ++r) t.value(r, c) = read_le_double(bf);
    }
    return out;
}

}  // namespace sacd
