#include "ee/checkpoint.hpp"

#include "ee/errors.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <type_traits>

namespace ee {

namespace {

template <typename T>
void put_le(std::ofstream& out, T value) {
    std::array<unsigned char, sizeof(T)> bytes{};
    std::uint64_t raw = 0;
    if constexpr (std::is_floating_point_v<T>) {
        raw = std::bit_cast<std::uint64_t>(value);
    } else {
        raw = static_cast<std::uint64_t>(value);
    }
    for (std::size_t b = 0; b < sizeof(T); ++b) {
        bytes[b] = static_cast<unsigned char>((raw >> (8 * b)) & 0xffu);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename T>
T get_le(std::ifstream& in, const std::string& path) {
    std::array<unsigned char, sizeof(T)> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
        throw IOFailure("truncated checkpoint '" + path + "'");
    }
    std::uint64_t raw = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
        raw |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    }
    if constexpr (std::is_same_v<T, double>) {
        return std::bit_cast<double>(raw);
    } else {
        return static_cast<T>(raw);
    }
}

} // namespace

void save_checkpoint(const Embedder& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IOFailure("cannot write checkpoint '" + path + "'");
    }
    const EmbedderSpec& spec = model.spec();
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    put_le<std::uint32_t>(out, kCheckpointVersion);
    put_le<std::uint32_t>(out, spec.architecture == Architecture::linear ? 0u : 1u);
    put_le<std::uint32_t>(out, spec.activation == Activation::relu ? 0u : 1u);
    put_le<std::uint32_t>(out, spec.normalize_output ? 1u : 0u);
    put_le<std::uint64_t>(out, spec.input_dim);
    put_le<std::uint64_t>(out, spec.embed_dim);
    put_le<std::uint64_t>(out, spec.hidden_width);
    put_le<std::uint64_t>(out, model.parameters().size());
    for (const Matrix& p : model.parameters()) {
        put_le<std::uint64_t>(out, p.rows());
        put_le<std::uint64_t>(out, p.cols());
        for (double v : p.values()) {
            put_le<double>(out, v);
        }
    }
    if (!out) {
        throw IOFailure("write failed for checkpoint '" + path + "'");
    }
}

Embedder load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IOFailure("cannot open checkpoint '" + path + "'");
    }
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw IOFailure("'" + path + "' is not a checkpoint");
    }
    const auto version = get_le<std::uint32_t>(in, path);
    if (version != kCheckpointVersion) {
        throw IOFailure("unsupported checkpoint version " + std::to_string(version));
    }
    EmbedderSpec spec;
    const auto arch = get_le<std::uint32_t>(in, path);
    const auto act = get_le<std::uint32_t>(in, path);
    const auto norm = get_le<std::uint32_t>(in, path);
    if (arch > 1 || act > 1 || norm > 1) {
        throw IOFailure("corrupt checkpoint header in '" + path + "'");
    }
    spec.architecture = arch == 0 ? Architecture::linear : Architecture::mlp;
    spec.activation = act == 0 ? Activation::relu : Activation::tanh;
    spec.normalize_output = norm == 1;
    spec.input_dim = get_le<std::uint64_t>(in, path);
    spec.embed_dim = get_le<std::uint64_t>(in, path);
    spec.hidden_width = get_le<std::uint64_t>(in, path);

    Embedder model(spec);
    const auto count = get_le<std::uint64_t>(in, path);
    if (count != model.parameters().size()) {
        throw IOFailure("checkpoint parameter count does not match its architecture");
    }
    for (Matrix& p : model.parameters()) {
        const auto rows = get_le<std::uint64_t>(in, path);
        const auto cols = get_le<std::uint64_t>(in, path);
        if (rows != p.rows() || cols != p.cols()) {
            throw IOFailure("checkpoint parameter shape does not match its header");
        }
        for (double& v : p.values()) {
            v = get_le<double>(in, path);
        }
    }
    return model;
}

} // namespace ee
