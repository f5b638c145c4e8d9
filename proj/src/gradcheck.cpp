#include "ee/gradcheck.hpp"

#include "ee/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>

namespace ee {

std::string LossVariant::name() const {
    return (expanded ? "ee_" : "") + to_string(kind);
}

LossVariant LossVariant::parse(const std::string& name) {
    const bool expanded = name.rfind("ee_", 0) == 0;
    return {parse_loss_kind(expanded ? name.substr(3) : name), expanded};
}

std::vector<LossVariant> all_loss_variants() {
    std::vector<LossVariant> out;
    for (bool expanded : {false, true}) {
        for (LossKind k : {LossKind::triplet, LossKind::hphn_triplet, LossKind::lifted, LossKind::npair, LossKind::ms}) {
            out.push_back({k, expanded});
        }
    }
    return out;
}

double relative_error(double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
    return std::abs(analytic - numeric) / scale;
}

namespace {

EmbeddingBatch random_batch(const GradcheckSpec& spec, bool normalize, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    EmbeddingBatch b;
    b.data = Matrix(static_cast<std::size_t>(spec.batch), static_cast<std::size_t>(spec.dim));
    for (double& v : b.data.values()) {
        v = gauss(rng);
    }
    if (normalize) {
        b.data = l2_normalize_rows(b.data);
    }
    for (int r = 0; r < spec.batch; ++r) {
        b.labels.push_back(r % spec.classes + 1);
    }
    return b;
}

// Max relative error for one batch, or nothing when any stencil evaluation
// lands on a different set of discrete decisions than the centre.
std::optional<double> check_batch(const EmbeddingBatch& batch, const LossConfig& config, const GradcheckSpec& spec) {
    const LossResult centre = evaluate_loss(batch, config);
    Matrix analytic = centre.grad;
    if (spec.corrupt_gradient) {
        analytic.values()[0] += 1e-2 * (1.0 + std::abs(analytic.values()[0]));
    }
    EmbeddingBatch probe = batch;
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.data.values().size(); ++i) {
        const double orig = probe.data.values()[i];
        probe.data.values()[i] = orig + spec.h;
        const LossResult up = evaluate_loss(probe, config);
        probe.data.values()[i] = orig - spec.h;
        const LossResult down = evaluate_loss(probe, config);
        probe.data.values()[i] = orig;
        if (up.decision_hash != centre.decision_hash || down.decision_hash != centre.decision_hash) {
            return std::nullopt;
        }
        const double numeric = (up.value - down.value) / (2.0 * spec.h);
        worst = std::max(worst, relative_error(analytic.values()[i], numeric));
    }
    return worst;
}

} // namespace

std::vector<GradcheckRow> run_gradcheck(const GradcheckSpec& spec) {
    if (spec.trials < 1) {
        throw ConfigError("gradcheck trials must be >= 1");
    }
    if (spec.classes < 2 || spec.batch < 2 * spec.classes || spec.dim < 1 || !(spec.h > 0.0)) {
        throw ConfigError("gradcheck needs >= 2 classes, >= 2 rows per class, dim >= 1 and h > 0");
    }
    std::vector<GradcheckRow> rows;
    for (const LossVariant& variant : spec.variants) {
        LossConfig config;
        config.kind = variant.kind;
        config.expansion.enabled = variant.expanded;
        config.expansion.n = spec.n;
        // Each variant gets its own stream so the suite is order-independent.
        std::mt19937_64 rng(spec.seed * 1000003ULL + static_cast<std::uint64_t>(variant.kind) * 2 +
                            (variant.expanded ? 1 : 0));
        GradcheckRow row{variant, 0.0, 0, 0, false};
        for (int t = 0; t < spec.trials; ++t) {
            std::optional<double> err;
            for (int attempt = 0; attempt <= spec.max_resamples && !err; ++attempt) {
                const EmbeddingBatch batch = random_batch(spec, loss_expects_normalized(variant.kind), rng);
                err = check_batch(batch, config, spec);
                if (!err) {
                    ++row.resampled;
                }
            }
            if (!err) {
                throw NonFiniteLoss("gradcheck: no kink-free batch for " + variant.name() + " after " +
                                    std::to_string(spec.max_resamples) + " resamples");
            }
            row.max_rel_error = std::max(row.max_rel_error, *err);
            ++row.trials;
        }
        row.pass = row.max_rel_error <= spec.threshold;
        rows.push_back(row);
    }
    return rows;
}

std::string gradcheck_to_csv(const std::vector<GradcheckRow>& rows) {
    std::string out = "loss,trials,resampled,max_rel_error,pass\n";
    char buf[64];
    for (const GradcheckRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.6e", r.max_rel_error);
        out += r.variant.name() + "," + std::to_string(r.trials) + "," + std::to_string(r.resampled) + "," + buf +
               "," + (r.pass ? "1" : "0") + "\n";
    }
    return out;
}

} // namespace ee
