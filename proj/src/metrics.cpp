#include "ee/metrics.hpp"

#include "ee/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace ee {

std::map<int, double> recall_at_k(const EmbeddingBatch& queries, const EmbeddingBatch& database,
                                  const std::vector<int>& ks, SelfMatch self_match) {
    if (database.size() == 0) {
        throw EmptyDatabase("recall_at_k: database is empty");
    }
    if (queries.dim() != database.dim()) {
        throw DimensionMismatch("recall_at_k: query and database dimensions differ");
    }
    if (!std::is_sorted(ks.begin(), ks.end()) || (!ks.empty() && ks.front() < 1)) {
        throw InvalidBatch("recall_at_k: ks must be positive and ascending");
    }
    const bool exclude = self_match == SelfMatch::exclude;
    std::vector<std::size_t> hits(ks.size(), 0);
    std::vector<double> dist(database.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const auto query = queries.data.row(q);
        // Rank of the best same-label row under the (distance, index) order.
        std::size_t best = kNoIndex;
        for (std::size_t r = 0; r < database.size(); ++r) {
            dist[r] = squared_distance(query, database.data.row(r));
            if (exclude && r == q) {
                continue;
            }
            if (database.labels[r] == queries.labels[q] && (best == kNoIndex || dist[r] < dist[best])) {
                best = r;
            }
        }
        if (best == kNoIndex) {
            continue;
        }
        std::size_t ahead = 0;
        for (std::size_t r = 0; r < database.size(); ++r) {
            if ((exclude && r == q) || r == best) {
                continue;
            }
            if (dist[r] < dist[best] || (dist[r] == dist[best] && r < best)) {
                ++ahead;
            }
        }
        for (std::size_t t = 0; t < ks.size(); ++t) {
            if (ahead < static_cast<std::size_t>(ks[t])) {
                ++hits[t];
            }
        }
    }
    std::map<int, double> out;
    for (std::size_t t = 0; t < ks.size(); ++t) {
        out[ks[t]] = queries.size() == 0 ? 0.0
                                         : static_cast<double>(hits[t]) / static_cast<double>(queries.size());
    }
    return out;
}

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iters) {
    const std::size_t n = points.rows();
    if (k < 1 || static_cast<std::size_t>(k) > n) {
        throw InvalidK("k must lie in [1, " + std::to_string(n) + "], got " + std::to_string(k));
    }
    if (max_iters < 1) {
        throw InvalidK("max_iters must be >= 1");
    }
    const auto kk = static_cast<std::size_t>(k);
    std::mt19937_64 rng(seed);
    Matrix centers(kk, points.cols());

    // k-means++ seeding.
    std::vector<double> closest(n, std::numeric_limits<double>::infinity());
    std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    std::copy(points.row(first).begin(), points.row(first).end(), centers.row(0).begin());
    for (std::size_t c = 1; c < kk; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            closest[i] = std::min(closest[i], squared_distance(points.row(i), centers.row(c - 1)));
            total += closest[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            double target = std::uniform_real_distribution<double>(0.0, total)(rng);
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                target -= closest[i];
                if (target < 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            // All points coincide with existing centers; take the first unused index.
            pick = c;
        }
        std::copy(points.row(pick).begin(), points.row(pick).end(), centers.row(c).begin());
    }

    KMeansResult result;
    result.assignments.assign(n, -1);
    std::vector<double> own_dist(n, 0.0);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < kk; ++c) {
                const double d = squared_distance(points.row(i), centers.row(c));
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(c);
                }
            }
            changed = changed || result.assignments[i] != best;
            result.assignments[i] = best;
            own_dist[i] = best_d;
            inertia += best_d;
        }
        result.inertia.push_back(inertia);
        result.iterations = iter + 1;
        if (!changed && iter > 0) {
            break;
        }
        // Update step.
        std::vector<std::size_t> counts(kk, 0);
        centers.fill(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(result.assignments[i]);
            axpy(1.0, points.row(i), centers.row(c));
            ++counts[c];
        }
        for (std::size_t c = 0; c < kk; ++c) {
            if (counts[c] > 0) {
                for (double& v : centers.row(c)) {
                    v /= static_cast<double>(counts[c]);
                }
                continue;
            }
            const auto far = static_cast<std::size_t>(
                std::max_element(own_dist.begin(), own_dist.end()) - own_dist.begin());
            std::copy(points.row(far).begin(), points.row(far).end(), centers.row(c).begin());
            own_dist[far] = 0.0;
        }
        if (!changed) {
            break;
        }
    }
    return result;
}

namespace {

struct Contingency {
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> rows;
    std::map<int, double> cols;
    double total = 0.0;
};

Contingency contingency(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) {
        throw LengthMismatch("assignments and labels differ in length");
    }
    Contingency t;
    for (std::size_t i = 0; i < a.size(); ++i) {
        t.joint[{a[i], b[i]}] += 1.0;
        t.rows[a[i]] += 1.0;
        t.cols[b[i]] += 1.0;
    }
    t.total = static_cast<double>(a.size());
    return t;
}

double entropy(const std::map<int, double>& counts, double total) {
    double h = 0.0;
    for (const auto& [key, c] : counts) {
        const double p = c / total;
        h -= p * std::log(p);
    }
    return h;
}

double pairs_of(double c) {
    return c * (c - 1.0) / 2.0;
}

} // namespace

double nmi(const std::vector<int>& assignments, const std::vector<int>& labels) {
    const Contingency t = contingency(assignments, labels);
    if (t.total == 0.0) {
        return 0.0;
    }
    const double ha = entropy(t.rows, t.total);
    const double hl = entropy(t.cols, t.total);
    if (ha <= 0.0 || hl <= 0.0) {
        return 0.0;
    }
    double mi = 0.0;
    for (const auto& [key, c] : t.joint) {
        const double pj = c / t.total;
        mi += pj * std::log(c * t.total / (t.rows.at(key.first) * t.cols.at(key.second)));
    }
    return std::clamp(mi / std::sqrt(ha * hl), 0.0, 1.0);
}

double pairwise_f1(const std::vector<int>& assignments, const std::vector<int>& labels) {
    const Contingency t = contingency(assignments, labels);
    double tp = 0.0;
    for (const auto& [key, c] : t.joint) {
        tp += pairs_of(c);
    }
    double same_cluster = 0.0;
    for (const auto& [key, c] : t.rows) {
        same_cluster += pairs_of(c);
    }
    double same_label = 0.0;
    for (const auto& [key, c] : t.cols) {
        same_label += pairs_of(c);
    }
    const double precision = same_cluster > 0.0 ? tp / same_cluster : 0.0;
    const double recall = same_label > 0.0 ? tp / same_label : 0.0;
    if (precision + recall <= 0.0) {
        return 0.0;
    }
    return 2.0 * precision * recall / (precision + recall);
}

std::string MetricsReport::to_json_line() const {
    nlohmann::json j = nlohmann::json::object();
    j["epoch"] = epoch;
    nlohmann::json recall = nlohmann::json::object();
    for (const auto& [k, v] : recall_at) {
        recall[std::to_string(k)] = v;
    }
    j["recall_at"] = recall;
    if (nmi) {
        j["nmi"] = *nmi;
    }
    if (f1) {
        j["f1"] = *f1;
    }
    nlohmann::json ex = nlohmann::json::object();
    for (const auto& [name, v] : extras) {
        ex[name] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
    }
    j["extras"] = ex;
    return j.dump();
}

RetrievalSummary evaluate_retrieval(const EmbeddingBatch& embeddings, const std::vector<int>& ks,
                                    std::uint64_t kmeans_seed) {
    RetrievalSummary s;
    s.recall_at = recall_at_k(embeddings, embeddings, ks, SelfMatch::exclude);
    const std::set<int> distinct(embeddings.labels.begin(), embeddings.labels.end());
    const auto clusters = kmeans(embeddings.data, static_cast<int>(distinct.size()), kmeans_seed);
    s.nmi = nmi(clusters.assignments, embeddings.labels);
    s.f1 = pairwise_f1(clusters.assignments, embeddings.labels);
    return s;
}

} // namespace ee
