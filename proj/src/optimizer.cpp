#include "ee/optimizer.hpp"

#include "ee/errors.hpp"

#include <cmath>

namespace ee {

void OptimizerConfig::validate() const {
    if (!(lr > 0.0)) {
        throw ConfigError("learning rate must be > 0");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError("adam betas must lie in [0, 1)");
    }
    if (!(eps > 0.0)) {
        throw ConfigError("adam eps must be > 0");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw ConfigError("sgd momentum must lie in [0, 1)");
    }
}

std::string to_string(OptimizerKind k) {
    return k == OptimizerKind::adam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer_kind(const std::string& name) {
    if (name == "adam") {
        return OptimizerKind::adam;
    }
    if (name == "sgd") {
        return OptimizerKind::sgd;
    }
    throw ConfigError("unknown optimizer '" + name + "'");
}

void Optimizer::step(std::vector<Matrix>& params, const std::vector<Matrix>& grads) {
    if (params.size() != grads.size()) {
        throw ShapeMismatch("optimizer: parameter and gradient counts differ");
    }
    if (first_.empty()) {
        for (const Matrix& p : params) {
            first_.emplace_back(p.rows(), p.cols());
            second_.emplace_back(p.rows(), p.cols());
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto theta = params[k].values();
        const auto g = grads[k].values();
        if (g.size() != theta.size()) {
            throw ShapeMismatch("optimizer: gradient shape differs from parameter shape");
        }
        auto m = first_[k].values();
        auto v = second_[k].values();
        for (std::size_t i = 0; i < theta.size(); ++i) {
            if (config_.kind == OptimizerKind::adam) {
                m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
                v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
                const double m_hat = m[i] / bc1;
                const double v_hat = v[i] / bc2;
                theta[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
            } else {
                m[i] = config_.momentum * m[i] + g[i];
                theta[i] -= config_.lr * m[i];
            }
        }
    }
}

} // namespace ee
