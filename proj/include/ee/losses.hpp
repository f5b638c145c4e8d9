#pragma once

#include "ee/geometry.hpp"
#include "ee/mining.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace ee {

enum class LossKind { triplet, hphn_triplet, lifted, npair, ms };

// How the triplet loss averages over negatives k for one positive pair.
enum class TripletReduction { inner_mean, inner_sum };

struct ExpansionConfig {
    bool enabled = false;
    int n = 2;
    bool normalize = true;
    DivisionRule rule = DivisionRule::equal_parts;
    PoolScope pool = PoolScope::endpoint;

    ExpansionOptions options() const { return {n, normalize, rule}; }
};

// Defaults are conventions for unit-norm embeddings, not tuned values.
struct LossConfig {
    LossKind kind = LossKind::hphn_triplet;
    double margin = 1.0;
    double ms_alpha = 2.0;
    double ms_beta = 50.0;
    double ms_lambda = 1.0;
    double ms_epsilon = 0.1;
    double npair_reg_coeff = 0.005;
    TripletReduction triplet_reduction = TripletReduction::inner_mean;
    ExpansionConfig expansion;

    // Throws ConfigError on out-of-range hyper-parameters.
    void validate() const;
};

struct LossResult {
    double value = 0.0;
    Matrix grad;  // same shape as the input batch
    std::size_t contributing_terms = 0;
    MiningTrace trace;
    // Hash of every discrete decision (selected indices, active hinges).
    // Two evaluations with equal hashes lie on the same smooth piece.
    std::uint64_t decision_hash = 0;
};

// Losses on L2-normalized rows expect the caller to have normalized them;
// N-pair works on raw embeddings and adds npair_reg_coeff * mean |x|^2.
bool loss_expects_normalized(LossKind kind);

LossResult evaluate_loss(const EmbeddingBatch& batch, const LossConfig& config);

LossResult triplet_loss(const EmbeddingBatch& batch, LossConfig config);
LossResult ee_triplet_loss(const EmbeddingBatch& batch, LossConfig config);
LossResult hphn_triplet_loss(const EmbeddingBatch& batch, LossConfig config);
LossResult ee_hphn_triplet_loss(const EmbeddingBatch& batch, LossConfig config);
LossResult lifted_loss(const EmbeddingBatch& batch, LossConfig config);
LossResult ee_lifted_loss(const EmbeddingBatch& batch, LossConfig config);
LossResult npair_loss(const EmbeddingBatch& batch, LossConfig config);
LossResult ee_npair_loss(const EmbeddingBatch& batch, LossConfig config);
LossResult ms_loss(const EmbeddingBatch& batch, LossConfig config);
LossResult ee_ms_loss(const EmbeddingBatch& batch, LossConfig config);

// Central differences, one coordinate at a time.
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& x, double h = 1e-6);

std::string to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& name);

} // namespace ee
