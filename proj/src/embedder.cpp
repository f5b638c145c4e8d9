#include "ee/embedder.hpp"

#include "ee/errors.hpp"
#include "ee/geometry.hpp"

#include <cmath>
#include <random>

namespace ee {

std::string to_string(Architecture a) {
    return a == Architecture::linear ? "linear" : "mlp";
}

std::string to_string(Activation a) {
    return a == Activation::relu ? "relu" : "tanh";
}

Architecture parse_architecture(const std::string& name) {
    if (name == "linear") {
        return Architecture::linear;
    }
    if (name == "mlp") {
        return Architecture::mlp;
    }
    throw ConfigError("unknown architecture '" + name + "'");
}

Activation parse_activation(const std::string& name) {
    if (name == "relu") {
        return Activation::relu;
    }
    if (name == "tanh") {
        return Activation::tanh;
    }
    throw ConfigError("unknown activation '" + name + "'");
}

Embedder::Embedder(const EmbedderSpec& spec) : spec_(spec) {
    if (spec.input_dim == 0 || spec.embed_dim == 0) {
        throw ShapeMismatch("embedder dimensions must be positive");
    }
    if (spec.architecture == Architecture::linear) {
        params_ = {Matrix(spec.input_dim, spec.embed_dim), Matrix(1, spec.embed_dim)};
    } else {
        if (spec.hidden_width == 0) {
            throw ShapeMismatch("mlp hidden width must be positive");
        }
        params_ = {Matrix(spec.input_dim, spec.hidden_width), Matrix(1, spec.hidden_width),
                   Matrix(spec.hidden_width, spec.embed_dim), Matrix(1, spec.embed_dim)};
    }
}

Embedder Embedder::initialized(const EmbedderSpec& spec, std::uint64_t seed) {
    Embedder e(spec);
    std::mt19937_64 rng(seed);
    for (std::size_t p = 0; p < e.params_.size(); p += 2) {
        Matrix& w = e.params_[p];
        const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (double& v : w.values()) {
            v = dist(rng);
        }
    }
    return e;
}

namespace {

void add_bias(Matrix& m, const Matrix& bias) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        axpy(1.0, bias.row(0), m.row(r));
    }
}

Matrix column_sums(const Matrix& m) {
    Matrix out(1, m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        axpy(1.0, m.row(r), out.row(0));
    }
    return out;
}

} // namespace

Embedder::Activations Embedder::run(const Matrix& x) const {
    if (x.cols() != spec_.input_dim) {
        throw ShapeMismatch("embedder expects " + std::to_string(spec_.input_dim) + " input columns, got " +
                            std::to_string(x.cols()));
    }
    Activations act;
    if (spec_.architecture == Architecture::linear) {
        act.raw_output = matmul(x, params_[0]);
        add_bias(act.raw_output, params_[1]);
    } else {
        act.pre_hidden = matmul(x, params_[0]);
        add_bias(act.pre_hidden, params_[1]);
        act.hidden = act.pre_hidden;
        for (double& v : act.hidden.values()) {
            v = spec_.activation == Activation::relu ? std::max(v, 0.0) : std::tanh(v);
        }
        act.raw_output = matmul(act.hidden, params_[2]);
        add_bias(act.raw_output, params_[3]);
    }
    if (spec_.normalize_output) {
        act.norms.resize(act.raw_output.rows());
        for (std::size_t r = 0; r < act.raw_output.rows(); ++r) {
            act.norms[r] = std::sqrt(squared_norm(act.raw_output.row(r)));
        }
        act.output = l2_normalize_rows(act.raw_output);
    } else {
        act.output = act.raw_output;
    }
    return act;
}

Matrix Embedder::forward(const Matrix& x) const {
    return run(x).output;
}

std::vector<Matrix> Embedder::backward(const Matrix& x, const Matrix& grad_output) const {
    const Activations act = run(x);
    if (grad_output.rows() != x.rows() || grad_output.cols() != spec_.embed_dim) {
        throw ShapeMismatch("upstream gradient must be " + std::to_string(x.rows()) + " x " +
                            std::to_string(spec_.embed_dim));
    }
    Matrix g_raw = grad_output;
    if (spec_.normalize_output) {
        for (std::size_t r = 0; r < g_raw.rows(); ++r) {
            const auto y = act.output.row(r);
            auto g = g_raw.row(r);
            const double proj = dot(y, g);
            for (std::size_t d = 0; d < g.size(); ++d) {
                g[d] = (g[d] - y[d] * proj) / act.norms[r];
            }
        }
    }
    if (spec_.architecture == Architecture::linear) {
        return {matmul_at_b(x, g_raw), column_sums(g_raw)};
    }
    Matrix g_hidden = matmul_a_bt(g_raw, params_[2]);
    for (std::size_t i = 0; i < g_hidden.values().size(); ++i) {
        const double pre = act.pre_hidden.values()[i];
        const double deriv = spec_.activation == Activation::relu ? (pre > 0.0 ? 1.0 : 0.0)
                                                                   : 1.0 - std::tanh(pre) * std::tanh(pre);
        g_hidden.values()[i] *= deriv;
    }
    return {matmul_at_b(x, g_hidden), column_sums(g_hidden), matmul_at_b(act.hidden, g_raw), column_sums(g_raw)};
}

} // namespace ee
