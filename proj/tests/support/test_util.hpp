#pragma once

#include "ee/geometry.hpp"

#include <random>

namespace ee::test {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double sigma = 1.0) {
    std::normal_distribution<double> g(0.0, sigma);
    Matrix m(rows, cols);
    for (double& v : m.values()) {
        v = g(rng);
    }
    return m;
}

// `classes` labels cycled over `rows` rows, so every class gets >= 2 members
// when rows >= 2 * classes.
inline Labels cyclic_labels(std::size_t rows, int classes) {
    Labels l(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        l[r] = static_cast<int>(r % static_cast<std::size_t>(classes)) + 1;
    }
    return l;
}

inline Labels random_labels(std::size_t rows, int classes, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(1, classes);
    Labels l(rows);
    for (int& v : l) {
        v = d(rng);
    }
    return l;
}

inline EmbeddingBatch random_batch(std::size_t rows, std::size_t dim, int classes, std::mt19937_64& rng,
                                   bool normalize) {
    EmbeddingBatch b{random_matrix(rows, dim, rng), cyclic_labels(rows, classes)};
    if (normalize) {
        b.data = l2_normalize_rows(b.data);
    }
    return b;
}

} // namespace ee::test
