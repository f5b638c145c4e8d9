#pragma once

#include "ee/matrix.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ee {

enum class Architecture { linear, mlp };
enum class Activation { relu, tanh };

struct EmbedderSpec {
    Architecture architecture = Architecture::linear;
    std::size_t input_dim = 32;
    std::size_t embed_dim = 16;
    std::size_t hidden_width = 64;  // mlp only
    Activation activation = Activation::relu;
    bool normalize_output = true;

    bool operator==(const EmbedderSpec&) const = default;
};

// Desk-scale stand-in for a backbone: y = x W + b (linear) or
// y = act(x W1 + b1) W2 + b2 (mlp), optionally L2-normalized per row.
// Parameter layout: linear {W, b}; mlp {W1, b1, W2, b2}. Biases are 1 x width.
class Embedder {
public:
    Embedder() = default;
    // Zero-initialized parameters.
    explicit Embedder(const EmbedderSpec& spec);
    // Xavier-uniform weights, zero biases.
    static Embedder initialized(const EmbedderSpec& spec, std::uint64_t seed);

    const EmbedderSpec& spec() const { return spec_; }
    std::vector<Matrix>& parameters() { return params_; }
    const std::vector<Matrix>& parameters() const { return params_; }

    Matrix forward(const Matrix& x) const;
    // Gradients of the loss w.r.t. each parameter, given d(loss)/d(output).
    std::vector<Matrix> backward(const Matrix& x, const Matrix& grad_output) const;

private:
    struct Activations {
        Matrix pre_hidden;  // mlp only
        Matrix hidden;      // mlp only
        Matrix raw_output;  // before normalization
        Matrix output;
        std::vector<double> norms;
    };
    Activations run(const Matrix& x) const;

    EmbedderSpec spec_;
    std::vector<Matrix> params_;
};

std::string to_string(Architecture a);
std::string to_string(Activation a);
Architecture parse_architecture(const std::string& name);
Activation parse_activation(const std::string& name);

} // namespace ee
