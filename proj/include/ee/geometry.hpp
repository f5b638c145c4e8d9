#pragma once

#include "ee/matrix.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace ee {

using Labels = std::vector<int>;

inline constexpr double kZeroNormTolerance = 1e-12;
inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

// N x D embeddings with one class label (>= 1) per row.
struct EmbeddingBatch {
    Matrix data;
    Labels labels;

    std::size_t size() const { return data.rows(); }
    std::size_t dim() const { return data.cols(); }
    // Throws InvalidBatch on empty data, label count mismatch, labels < 1 or
    // non-finite entries.
    void validate() const;
};

// Where a synthetic point sits on the segment x_j -> x_i.
//   equal_parts:   k/(n+1), k = 1..n  (n strictly interior points)
//   paper_formula: k/n,     k = 1..n  (the last point coincides with x_i)
enum class DivisionRule { equal_parts, paper_formula };

struct SyntheticPointSet {
    Matrix points;
    std::size_t source_i = 0;
    std::size_t source_j = 0;
    int class_label = 0;
    bool normalized = false;
    // weights[k] is the coefficient of x_i in point k; x_j gets 1 - weights[k].
    std::vector<double> weights;
    // Norm of each point before normalization; empty while normalized is false.
    std::vector<double> raw_norms;
};

// Same-class pair of original rows, first < second.
struct PositivePair {
    std::size_t first = 0;
    std::size_t second = 0;
    int label = 0;
    bool operator==(const PositivePair&) const = default;
};

enum class Provenance { original, synthetic };

struct RowSource {
    Provenance provenance = Provenance::original;
    // For synthetic rows: index into AugmentedBatch::pairs, the two source
    // rows and the coefficient of `first`. For originals `first` is the row itself.
    std::size_t pair = kNoIndex;
    std::size_t first = 0;
    std::size_t second = 0;
    double weight_first = 1.0;
    double raw_norm = 0.0;  // > 0 only for normalized synthetics
};

struct ExpansionOptions {
    int n = 2;
    bool normalize = true;
    DivisionRule rule = DivisionRule::equal_parts;
};

// Originals (rows [0, original_count)) followed by n synthetics per positive
// pair, pair-major in the order of `pairs`.
struct AugmentedBatch {
    Matrix data;
    Labels labels;
    std::vector<RowSource> sources;
    std::vector<PositivePair> pairs;
    std::size_t original_count = 0;
    int n = 0;
    bool normalized = false;

    std::size_t size() const { return data.rows(); }
    bool is_synthetic(std::size_t row) const { return sources[row].provenance == Provenance::synthetic; }
};

Matrix l2_normalize_rows(const Matrix& e);

Matrix pairwise_sq_distance(const Matrix& a, const Matrix& b);
Matrix pairwise_similarity(const Matrix& a, const Matrix& b);

// Coefficient of x_i for the k-th point (1-based k).
double division_weight(int k, int n, DivisionRule rule);

SyntheticPointSet generate_internal_points(std::span<const double> x_i, std::span<const double> x_j, int n,
                                           DivisionRule rule = DivisionRule::equal_parts);
SyntheticPointSet normalize_synthetics(const SyntheticPointSet& s);

AugmentedBatch expand_batch(const EmbeddingBatch& batch, const ExpansionOptions& options);

// Wraps a batch as an AugmentedBatch with no synthetic rows.
AugmentedBatch originals_only(const EmbeddingBatch& batch);

// Chain rule from d(loss)/d(augmented rows) to d(loss)/d(original rows).
// Synthetic rows are linear in their sources; normalized ones also go
// through the projection (I - s s^T) / |s_raw|.
Matrix backprop_to_originals(const AugmentedBatch& augmented, const Matrix& grad_augmented);

} // namespace ee
