#pragma once

#include "ee/losses.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ee {

struct LossVariant {
    LossKind kind = LossKind::triplet;
    bool expanded = false;

    // "triplet", "ee_triplet", ...
    std::string name() const;
    static LossVariant parse(const std::string& name);
};

// Five base losses followed by their expanded forms.
std::vector<LossVariant> all_loss_variants();

struct GradcheckSpec {
    std::vector<LossVariant> variants = all_loss_variants();
    int trials = 100;
    int batch = 16;
    int dim = 8;
    int classes = 4;
    int n = 2;
    double h = 1e-6;
    double threshold = 1e-5;
    std::uint64_t seed = 1;
    // Resampling budget per trial when the stencil crosses a kink or tie.
    int max_resamples = 50;
    // Test hook: perturbs one analytic gradient entry so the check must fail.
    bool corrupt_gradient = false;
};

struct GradcheckRow {
    LossVariant variant;
    double max_rel_error = 0.0;
    int trials = 0;
    int resampled = 0;  // batches rejected for a decision change inside the stencil
    bool pass = false;
};

// |a - f| / max(|a|, |f|, 1e-3)
double relative_error(double analytic, double numeric);

std::vector<GradcheckRow> run_gradcheck(const GradcheckSpec& spec);

std::string gradcheck_to_csv(const std::vector<GradcheckRow>& rows);

} // namespace ee
