#pragma once

#include "ee/geometry.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ee {

enum class SelfMatch { include, exclude };

// Fraction of queries whose K nearest database rows (Euclidean, ties to the
// lower database index) contain a row with the query's label. With
// SelfMatch::exclude, query i never matches database row i (use when both
// sides are the same set).
std::map<int, double> recall_at_k(const EmbeddingBatch& queries, const EmbeddingBatch& database,
                                  const std::vector<int>& ks, SelfMatch self_match);

struct KMeansResult {
    std::vector<int> assignments;  // 0..k-1
    std::vector<double> inertia;   // after each Lloyd iteration
    int iterations = 0;
};

// k-means++ seeding, then Lloyd iterations until the assignment stops
// changing or max_iters. An empty cluster is re-seeded at the point farthest
// from its current centroid.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iters = 100);

// I(A;L) / sqrt(H(A) H(L)), natural logs; 0 when either entropy is 0.
double nmi(const std::vector<int>& assignments, const std::vector<int>& labels);

// Pair-counting F1 over all unordered point pairs.
double pairwise_f1(const std::vector<int>& assignments, const std::vector<int>& labels);

struct MetricsReport {
    int epoch = 0;
    std::map<int, double> recall_at;
    std::optional<double> nmi;
    std::optional<double> f1;
    std::map<std::string, double> extras;

    // One JSON object, no trailing newline. Keys are sorted, numbers are
    // printed round-trip exact, so equal reports give equal bytes.
    std::string to_json_line() const;
};

struct RetrievalSummary {
    std::map<int, double> recall_at;
    double nmi = 0.0;
    double f1 = 0.0;
};

// Recall@ks on the set against itself (self excluded) plus NMI/F1 of k-means
// with k = number of distinct labels.
RetrievalSummary evaluate_retrieval(const EmbeddingBatch& embeddings, const std::vector<int>& ks,
                                    std::uint64_t kmeans_seed);

} // namespace ee
