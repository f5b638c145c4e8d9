#include "ee/metrics.hpp"

#include "ee/errors.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

using namespace ee;

using test::f1_oracle;
using test::nmi_oracle;
using test::recall_oracle;

TEST(Metrics, RecallExamples) {
    EmbeddingBatch db{Matrix{{0, 0}, {0.1, 0}, {5, 5}, {5.1, 5}}, {1, 1, 2, 2}};
    EXPECT_EQ(recall_at_k(db, db, {1}, SelfMatch::include).at(1), 1.0);
    EXPECT_EQ(recall_at_k(db, db, {1}, SelfMatch::exclude).at(1), 1.0);
    EXPECT_THROW(recall_at_k(db, EmbeddingBatch{Matrix(0, 2), {}}, {1}, SelfMatch::include), EmptyDatabase);
    EXPECT_THROW(recall_at_k(db, db, {2, 1}, SelfMatch::include), InvalidBatch);

    // Tie: query equidistant from a wrong-label row 0 and a right-label row 1; lower index wins.
    EmbeddingBatch q{Matrix{{0, 0}}, {2}};
    EmbeddingBatch tie{Matrix{{1, 0}, {-1, 0}}, {1, 2}};
    const auto r = recall_at_k(q, tie, {1, 2}, SelfMatch::include);
    EXPECT_EQ(r.at(1), 0.0);
    EXPECT_EQ(r.at(2), 1.0);
}

TEST(Metrics, RecallMatchesSortOracle) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 5 + static_cast<std::size_t>(trial % 26);
        EmbeddingBatch b{test::random_matrix(n, 3, rng), test::random_labels(n, 4, rng)};
        if (trial % 3 == 0) {
            // Quantize to force distance ties.
            for (double& v : b.data.values()) v = std::round(v);
        }
        const std::vector<int> ks{1, 2, 4, 8};
        EXPECT_EQ(recall_at_k(b, b, ks, SelfMatch::exclude), recall_oracle(b, b, ks, true));
        EXPECT_EQ(recall_at_k(b, b, ks, SelfMatch::include), recall_oracle(b, b, ks, false));
        const auto r = recall_at_k(b, b, ks, SelfMatch::exclude);
        EXPECT_LE(r.at(1), r.at(2));
        EXPECT_LE(r.at(2), r.at(4));
        EXPECT_LE(r.at(4), r.at(8));
    }
}

TEST(Metrics, RecallAtFullDatabaseIsOne) {
    std::mt19937_64 rng(22);
    EmbeddingBatch b{test::random_matrix(12, 3, rng), test::cyclic_labels(12, 3)};
    EXPECT_EQ(recall_at_k(b, b, {11}, SelfMatch::exclude).at(11), 1.0);
}

TEST(Metrics, NmiAndF1Examples) {
    const std::vector<int> l{1, 1, 2, 2, 3, 3};
    EXPECT_NEAR(nmi(l, l), 1.0, 1e-15);
    EXPECT_EQ(pairwise_f1(l, l), 1.0);
    EXPECT_EQ(nmi({0, 0, 0, 0, 0, 0}, l), 0.0);
    EXPECT_EQ(pairwise_f1({0, 1, 2, 3, 4, 5}, l), 0.0);
    // Hand case: clusters {0,1,2},{3,4,5} vs labels {0,1},{2,3},{4,5}.
    const std::vector<int> a{0, 0, 0, 1, 1, 1};
    // Same-cluster pairs: 6; same-label among them: (0,1),(4,5) = 2. Same-label pairs: 3.
    const double p = 2.0 / 6.0, r = 2.0 / 3.0;
    EXPECT_NEAR(pairwise_f1(a, l), 2 * p * r / (p + r), 1e-15);
    EXPECT_NEAR(nmi(a, l), nmi_oracle(a, l), 1e-14);
    EXPECT_THROW(nmi({1, 2}, {1}), LengthMismatch);
}

TEST(Metrics, NmiAndF1MatchOraclesAndArePermutationInvariant) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 29);
        const Labels a = test::random_labels(n, 4, rng);
        const Labels l = test::random_labels(n, 3, rng);
        EXPECT_NEAR(nmi(a, l), nmi_oracle(a, l), 1e-12);
        EXPECT_NEAR(pairwise_f1(a, l), f1_oracle(a, l), 1e-12);
        std::vector<int> perm{1, 2, 3, 4};
        std::shuffle(perm.begin(), perm.end(), rng);
        Labels pa = a;
        for (int& v : pa) v = perm[static_cast<std::size_t>(v - 1)] + 10;
        EXPECT_NEAR(nmi(pa, l), nmi(a, l), 1e-12);
        EXPECT_EQ(pairwise_f1(pa, l), pairwise_f1(a, l));
        if (std::set<int>(a.begin(), a.end()).size() > 1) {
            EXPECT_NEAR(nmi(a, a), 1.0, 1e-12);
        }
    }
}

TEST(Metrics, KMeansProperties) {
    std::mt19937_64 rng(24);
    const Matrix pts = test::random_matrix(7, 2, rng);
    const KMeansResult all = kmeans(pts, 7, 1);
    EXPECT_EQ(std::set<int>(all.assignments.begin(), all.assignments.end()).size(), 7u);
    EXPECT_NEAR(all.inertia.back(), 0.0, 1e-20);

    Matrix blobs = test::random_matrix(40, 2, rng, 0.1);
    Labels truth(40);
    for (std::size_t r = 0; r < 40; ++r) {
        truth[r] = r < 20 ? 1 : 2;
        if (r >= 20) blobs(r, 0) += 10.0;
    }
    const KMeansResult two = kmeans(blobs, 2, 5);
    EXPECT_EQ(nmi(two.assignments, truth), 1.0);
    for (std::size_t i = 1; i < two.inertia.size(); ++i) {
        EXPECT_LE(two.inertia[i], two.inertia[i - 1] + 1e-12);
    }
    const KMeansResult again = kmeans(blobs, 2, 5);
    EXPECT_EQ(again.assignments, two.assignments);
    EXPECT_THROW(kmeans(blobs, 41, 1), InvalidK);
    EXPECT_THROW(kmeans(blobs, 0, 1), InvalidK);
}

TEST(Metrics, KMeansInertiaIsMonotoneOnRandomData) {
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix pts = test::random_matrix(30, 3, rng);
        const KMeansResult r = kmeans(pts, 2 + trial % 5, static_cast<std::uint64_t>(trial));
        for (std::size_t i = 1; i < r.inertia.size(); ++i) {
            EXPECT_LE(r.inertia[i], r.inertia[i - 1] + 1e-12);
        }
    }
}

TEST(Metrics, ReportJsonIsStable) {
    MetricsReport r;
    r.epoch = 3;
    r.recall_at = {{1, 0.5}, {2, 0.75}};
    r.nmi = 0.1;
    r.extras["loss"] = 1.0 / 3.0;
    r.extras["ratio_syn"] = std::nan("");
    EXPECT_EQ(r.to_json_line(),
              R"({"epoch":3,"extras":{"loss":0.3333333333333333,"ratio_syn":null},"nmi":0.1,"recall_at":{"1":0.5,"2":0.75}})");
}

TEST(Metrics, EvaluateRetrievalOnSeparatedClusters) {
    std::mt19937_64 rng(26);
    EmbeddingBatch b{test::random_matrix(30, 2, rng, 0.05), test::cyclic_labels(30, 3)};
    for (std::size_t r = 0; r < 30; ++r) b.data(r, 0) += 10.0 * b.labels[r];
    const RetrievalSummary s = evaluate_retrieval(b, {1, 2}, 1);
    EXPECT_EQ(s.recall_at.at(1), 1.0);
    EXPECT_EQ(s.nmi, 1.0);
    EXPECT_EQ(s.f1, 1.0);
}
