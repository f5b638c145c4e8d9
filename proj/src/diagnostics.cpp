#include "ee/diagnostics.hpp"

#include "ee/errors.hpp"
#include "ee/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace ee {

LabelCertainty synthetic_label_certainty(const EmbeddingBatch& embeddings, const ExpansionOptions& options) {
    embeddings.validate();
    const AugmentedBatch aug = expand_batch(embeddings, options);
    if (aug.size() == aug.original_count) {
        throw InvalidBatch("label certainty needs a class with at least two members");
    }
    EmbeddingBatch synthetic;
    std::vector<std::size_t> rows(aug.size() - aug.original_count);
    std::iota(rows.begin(), rows.end(), aug.original_count);
    synthetic.data = select_rows(aug.data, rows);
    synthetic.labels.assign(aug.labels.begin() + static_cast<std::ptrdiff_t>(aug.original_count), aug.labels.end());

    LabelCertainty out;
    out.synthetic_recall_at_1 = recall_at_k(synthetic, embeddings, {1}, SelfMatch::include).at(1);
    out.original_recall_at_1 = recall_at_k(embeddings, embeddings, {1}, SelfMatch::exclude).at(1);
    return out;
}

LabelCertainty synthetic_label_certainty(const FeatureDataset& train, const Embedder& model,
                                         const ExpansionOptions& options) {
    return synthetic_label_certainty(EmbeddingBatch{model.forward(train.features), train.labels}, options);
}

double synthetic_query_robustness(const EmbeddingBatch& test, int combine_count, int trials, std::uint64_t seed,
                                  bool normalize) {
    test.validate();
    if (combine_count < 1 || trials < 1) {
        throw InvalidBatch("combine_count and trials must be >= 1");
    }
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t r = 0; r < test.size(); ++r) {
        members[test.labels[r]].push_back(r);
    }
    std::mt19937_64 rng(seed);
    EmbeddingBatch queries;
    std::vector<double> combined(test.dim());
    for (int t = 0; t < trials; ++t) {
        for (auto& [label, rows] : members) {
            if (rows.size() < static_cast<std::size_t>(combine_count)) {
                continue;
            }
            std::vector<std::size_t> pool = rows;
            std::shuffle(pool.begin(), pool.end(), rng);
            std::fill(combined.begin(), combined.end(), 0.0);
            for (int c = 0; c < combine_count; ++c) {
                axpy(1.0 / combine_count, test.data.row(pool[static_cast<std::size_t>(c)]), combined);
            }
            if (normalize) {
                const double norm = std::sqrt(squared_norm(combined));
                if (!(norm > kZeroNormTolerance)) {
                    throw ZeroNormRow(queries.size());
                }
                for (double& v : combined) {
                    v /= norm;
                }
            }
            queries.data.append_row(combined);
            queries.labels.push_back(label);
        }
    }
    if (queries.size() == 0) {
        throw InvalidBatch("no class has " + std::to_string(combine_count) + " members");
    }
    return recall_at_k(queries, test, {1}, SelfMatch::include).at(1);
}

Matrix export_distance_heatmap(const EmbeddingBatch& embeddings, const std::string& path) {
    embeddings.validate();
    std::map<int, std::vector<std::size_t>> firsts;
    for (std::size_t r = 0; r < embeddings.size(); ++r) {
        auto& v = firsts[embeddings.labels[r]];
        if (v.size() < 2) {
            v.push_back(r);
        }
    }
    std::vector<std::size_t> first_rows;
    std::vector<std::size_t> second_rows;
    for (const auto& [label, rows] : firsts) {
        if (rows.size() == 2) {
            first_rows.push_back(rows[0]);
            second_rows.push_back(rows[1]);
        }
    }
    if (first_rows.empty()) {
        throw InvalidBatch("heatmap needs at least one class with two samples");
    }
    Matrix heat(first_rows.size(), second_rows.size());
    double max_entry = 0.0;
    for (std::size_t a = 0; a < first_rows.size(); ++a) {
        for (std::size_t b = 0; b < second_rows.size(); ++b) {
            heat(a, b) =
                std::sqrt(squared_distance(embeddings.data.row(first_rows[a]), embeddings.data.row(second_rows[b])));
            max_entry = std::max(max_entry, heat(a, b));
        }
    }
    if (max_entry > 0.0) {
        for (double& v : heat.values()) {
            v /= max_entry;
        }
    }
    if (!path.empty()) {
        std::ofstream out(path);
        if (!out) {
            throw IOFailure("cannot write heatmap '" + path + "'");
        }
        char buf[32];
        for (std::size_t a = 0; a < heat.rows(); ++a) {
            for (std::size_t b = 0; b < heat.cols(); ++b) {
                std::snprintf(buf, sizeof(buf), "%.17g", heat(a, b));
                out << (b == 0 ? "" : ",") << buf;
            }
            out << '\n';
        }
        if (!out) {
            throw IOFailure("write failed for '" + path + "'");
        }
    }
    return heat;
}

Matrix read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IOFailure("cannot open '" + path + "'");
    }
    Matrix m;
    std::string line;
    std::vector<double> row;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        row.clear();
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            row.push_back(std::stod(cell));
        }
        m.append_row(row);
    }
    return m;
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

EmbeddingBatch random_bench_batch(int batch, int dim, int per_class, std::mt19937_64& rng, bool normalize) {
    std::normal_distribution<double> noise(0.0, 1.0);
    EmbeddingBatch b;
    b.data = Matrix(static_cast<std::size_t>(batch), static_cast<std::size_t>(dim));
    for (double& v : b.data.values()) {
        v = noise(rng);
    }
    if (normalize) {
        b.data = l2_normalize_rows(b.data);
    }
    for (int r = 0; r < batch; ++r) {
        b.labels.push_back(r / per_class + 1);
    }
    return b;
}

} // namespace

std::vector<BenchRow> bench_generation(const BenchSpec& spec) {
    if (spec.repeats < 10) {
        throw InvalidBatch("bench needs at least 10 repeats");
    }
    using clock = std::chrono::steady_clock;
    std::mt19937_64 rng(spec.seed);
    std::vector<BenchRow> rows;
    volatile double sink = 0.0;
    for (int batch : spec.batch_sizes) {
        const EmbeddingBatch b = random_bench_batch(batch, spec.dim, spec.samples_per_class, rng, spec.normalize);
        for (int n : spec.n_values) {
            LossConfig config;
            config.kind = spec.loss;
            config.expansion.enabled = n > 0;
            config.expansion.n = std::max(n, 1);
            config.expansion.normalize = spec.normalize;
            std::vector<double> gen;
            std::vector<double> total;
            for (int rep = 0; rep < spec.repeats; ++rep) {
                if (n > 0) {
                    const auto t0 = clock::now();
                    const AugmentedBatch aug = expand_batch(b, config.expansion.options());
                    const auto t1 = clock::now();
                    sink = sink + aug.data(aug.size() - 1, 0);
                    gen.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
                }
                const auto t0 = clock::now();
                const LossResult r = evaluate_loss(b, config);
                const auto t1 = clock::now();
                sink = sink + r.value;
                total.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
            }
            rows.push_back({batch, n, n > 0 ? median(gen) : 0.0, median(total)});
        }
    }
    return rows;
}

std::string bench_to_csv(const BenchSpec& spec, const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << "batch,dim,row";
    for (int n : spec.n_values) {
        out << ",n=" << n;
    }
    out << '\n';
    char buf[32];
    for (int batch : spec.batch_sizes) {
        for (const char* which : {"Gen", "Total"}) {
            out << batch << ',' << spec.dim << ',' << which;
            for (int n : spec.n_values) {
                const auto it = std::find_if(rows.begin(), rows.end(),
                                             [&](const BenchRow& r) { return r.batch == batch && r.n == n; });
                const double v = it == rows.end() ? 0.0 : (which[0] == 'G' ? it->gen_ms : it->total_ms);
                std::snprintf(buf, sizeof(buf), "%.4f", v);
                out << ',' << buf;
            }
            out << '\n';
        }
    }
    return out.str();
}

} // namespace ee
