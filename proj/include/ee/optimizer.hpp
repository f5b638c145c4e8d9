#pragma once

#include "ee/matrix.hpp"

#include <string>
#include <vector>

namespace ee {

enum class OptimizerKind { adam, sgd };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double momentum = 0.0;  // sgd only

    void validate() const;
};

// Adam (bias-corrected) or SGD with heavy-ball momentum. State is sized
// lazily on the first step.
class Optimizer {
public:
    explicit Optimizer(const OptimizerConfig& config) : config_(config) { config_.validate(); }

    void step(std::vector<Matrix>& params, const std::vector<Matrix>& grads);
    long steps_taken() const { return t_; }

private:
    OptimizerConfig config_;
    std::vector<Matrix> first_;
    std::vector<Matrix> second_;
    long t_ = 0;
};

std::string to_string(OptimizerKind k);
OptimizerKind parse_optimizer_kind(const std::string& name);

} // namespace ee
