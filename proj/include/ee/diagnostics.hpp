#pragma once

#include "ee/data.hpp"
#include "ee/embedder.hpp"
#include "ee/geometry.hpp"
#include "ee/losses.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ee {

struct LabelCertainty {
    double synthetic_recall_at_1 = 0.0;
    double original_recall_at_1 = 0.0;
};

// Expands the embeddings, then scores synthetic rows as queries against the
// originals, and the originals against themselves with self excluded.
LabelCertainty synthetic_label_certainty(const EmbeddingBatch& embeddings, const ExpansionOptions& options);
LabelCertainty synthetic_label_certainty(const FeatureDataset& train, const Embedder& model,
                                         const ExpansionOptions& options);

// Per trial and per class with at least combine_count members: average
// combine_count distinct random members (L2-normalized when `normalize`)
// and query it against the full set. Returns Recall@1 over all such queries.
double synthetic_query_robustness(const EmbeddingBatch& test, int combine_count, int trials, std::uint64_t seed,
                                  bool normalize);

// C x C Euclidean distances between the first (rows) and second (columns)
// sample of each class with >= 2 samples, classes ascending, scaled so the
// max entry is 1. Written as plain CSV when `path` is non-empty.
Matrix export_distance_heatmap(const EmbeddingBatch& embeddings, const std::string& path);
Matrix read_csv_matrix(const std::string& path);

struct BenchSpec {
    std::vector<int> batch_sizes{128};
    std::vector<int> n_values{0, 2, 4, 8, 16, 32};
    int dim = 64;
    int samples_per_class = 4;
    int repeats = 20;
    LossKind loss = LossKind::hphn_triplet;
    bool normalize = true;
    std::uint64_t seed = 1;
};

struct BenchRow {
    int batch = 0;
    int n = 0;
    double gen_ms = 0.0;    // median; 0 by definition at n = 0
    double total_ms = 0.0;  // median of the full (EE) loss evaluation incl. generation
};

std::vector<BenchRow> bench_generation(const BenchSpec& spec);

// Table layout: one "Gen" and one "Total" line per batch size, one column per n.
std::string bench_to_csv(const BenchSpec& spec, const std::vector<BenchRow>& rows);

} // namespace ee
