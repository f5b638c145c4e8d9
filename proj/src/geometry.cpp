#include "ee/geometry.hpp"

#include "ee/errors.hpp"
#include "ee/mining.hpp"

#include <algorithm>
#include <cmath>

namespace ee {

void EmbeddingBatch::validate() const {
    if (data.rows() == 0 || data.cols() == 0) {
        throw InvalidBatch("embedding batch is empty");
    }
    if (labels.size() != data.rows()) {
        throw InvalidBatch("label count " + std::to_string(labels.size()) + " != row count " +
                           std::to_string(data.rows()));
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 1) {
            throw InvalidBatch("label of row " + std::to_string(i) + " is < 1");
        }
    }
    if (!all_finite(data)) {
        throw InvalidBatch("embedding batch has non-finite entries");
    }
}

Matrix l2_normalize_rows(const Matrix& e) {
    Matrix out = e;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        const double norm = std::sqrt(squared_norm(row));
        if (!(norm > kZeroNormTolerance)) {
            throw ZeroNormRow(r);
        }
        for (double& v : row) {
            v /= norm;
        }
    }
    return out;
}

Matrix pairwise_sq_distance(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw DimensionMismatch("pairwise_sq_distance: " + std::to_string(a.cols()) + " vs " +
                                std::to_string(b.cols()) + " columns");
    }
    Matrix out(a.rows(), b.rows());
    for (std::size_t p = 0; p < a.rows(); ++p) {
        for (std::size_t q = 0; q < b.rows(); ++q) {
            out(p, q) = squared_distance(a.row(p), b.row(q));
        }
    }
    return out;
}

Matrix pairwise_similarity(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw DimensionMismatch("pairwise_similarity: " + std::to_string(a.cols()) + " vs " +
                                std::to_string(b.cols()) + " columns");
    }
    return matmul_a_bt(a, b);
}

double division_weight(int k, int n, DivisionRule rule) {
    const int denom = rule == DivisionRule::equal_parts ? n + 1 : n;
    return static_cast<double>(k) / static_cast<double>(denom);
}

namespace {

// (k * x_i + (denom - k) * x_j) / denom, written out so that symmetric
// cases (midpoints, integer grids) come out exact.
void write_division_point(std::span<const double> x_i, std::span<const double> x_j, int k, int n,
                          DivisionRule rule, std::span<double> out) {
    const int denom = rule == DivisionRule::equal_parts ? n + 1 : n;
    const double a = static_cast<double>(k);
    const double b = static_cast<double>(denom - k);
    const double inv = static_cast<double>(denom);
    for (std::size_t d = 0; d < out.size(); ++d) {
        out[d] = (a * x_i[d] + b * x_j[d]) / inv;
    }
}

} // namespace

SyntheticPointSet generate_internal_points(std::span<const double> x_i, std::span<const double> x_j, int n,
                                           DivisionRule rule) {
    if (n < 1) {
        throw InvalidN("number of synthetic points must be >= 1, got " + std::to_string(n));
    }
    if (x_i.size() != x_j.size()) {
        throw DimensionMismatch("generate_internal_points: source dimensions differ");
    }
    SyntheticPointSet s;
    s.points = Matrix(static_cast<std::size_t>(n), x_i.size());
    s.weights.resize(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) {
        write_division_point(x_i, x_j, k, n, rule, s.points.row(static_cast<std::size_t>(k - 1)));
        s.weights[static_cast<std::size_t>(k - 1)] = division_weight(k, n, rule);
    }
    return s;
}

SyntheticPointSet normalize_synthetics(const SyntheticPointSet& s) {
    if (s.normalized) {
        throw InvalidBatch("synthetic point set is already normalized");
    }
    SyntheticPointSet out = s;
    out.raw_norms.resize(s.points.rows());
    for (std::size_t r = 0; r < s.points.rows(); ++r) {
        out.raw_norms[r] = std::sqrt(squared_norm(s.points.row(r)));
    }
    out.points = l2_normalize_rows(s.points);
    out.normalized = true;
    return out;
}

AugmentedBatch originals_only(const EmbeddingBatch& batch) {
    AugmentedBatch out;
    out.data = batch.data;
    out.labels = batch.labels;
    out.original_count = batch.size();
    out.sources.resize(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        out.sources[i].first = i;
        out.sources[i].second = i;
    }
    out.pairs = enumerate_positive_pairs(batch.labels);
    return out;
}

AugmentedBatch expand_batch(const EmbeddingBatch& batch, const ExpansionOptions& options) {
    if (options.n < 1) {
        throw InvalidN("expansion requires n >= 1, got " + std::to_string(options.n));
    }
    AugmentedBatch out = originals_only(batch);
    out.n = options.n;
    out.normalized = options.normalize;

    const std::size_t n = static_cast<std::size_t>(options.n);
    const std::size_t total = batch.size() + out.pairs.size() * n;
    Matrix data(total, batch.dim());
    std::copy(batch.data.values().begin(), batch.data.values().end(), data.values().begin());
    out.labels.reserve(total);
    out.sources.reserve(total);

    std::size_t row = batch.size();
    for (std::size_t p = 0; p < out.pairs.size(); ++p) {
        const PositivePair& pair = out.pairs[p];
        const auto x_i = batch.data.row(pair.first);
        const auto x_j = batch.data.row(pair.second);
        for (int k = 1; k <= options.n; ++k, ++row) {
            auto dst = data.row(row);
            write_division_point(x_i, x_j, k, options.n, options.rule, dst);
            RowSource src;
            src.provenance = Provenance::synthetic;
            src.pair = p;
            src.first = pair.first;
            src.second = pair.second;
            src.weight_first = division_weight(k, options.n, options.rule);
            if (options.normalize) {
                const double norm = std::sqrt(squared_norm(dst));
                if (!(norm > kZeroNormTolerance)) {
                    throw ZeroNormRow(row);
                }
                for (double& v : dst) {
                    v /= norm;
                }
                src.raw_norm = norm;
            }
            out.labels.push_back(pair.label);
            out.sources.push_back(src);
        }
    }
    out.data = std::move(data);
    return out;
}

Matrix backprop_to_originals(const AugmentedBatch& augmented, const Matrix& grad_augmented) {
    if (grad_augmented.rows() != augmented.size() || grad_augmented.cols() != augmented.data.cols()) {
        throw DimensionMismatch("backprop_to_originals: gradient shape does not match augmented batch");
    }
    const std::size_t dim = augmented.data.cols();
    Matrix grad(augmented.original_count, dim);
    for (std::size_t r = 0; r < augmented.original_count; ++r) {
        const auto g = grad_augmented.row(r);
        std::copy(g.begin(), g.end(), grad.row(r).begin());
    }
    std::vector<double> g_raw(dim);
    for (std::size_t r = augmented.original_count; r < augmented.size(); ++r) {
        const RowSource& src = augmented.sources[r];
        const auto g = grad_augmented.row(r);
        if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) {
            continue;
        }
        std::copy(g.begin(), g.end(), g_raw.begin());
        if (src.raw_norm > 0.0) {
            const auto s = augmented.data.row(r);
            const double proj = dot(s, g);
            for (std::size_t d = 0; d < dim; ++d) {
                g_raw[d] = (g[d] - s[d] * proj) / src.raw_norm;
            }
        }
        axpy(src.weight_first, g_raw, grad.row(src.first));
        axpy(1.0 - src.weight_first, g_raw, grad.row(src.second));
    }
    return grad;
}

} // namespace ee
