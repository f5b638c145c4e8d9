#include "ee/matrix.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ee;

TEST(Matrix, MatmulMatchesLoopOracle) {
    std::mt19937_64 rng(3);
    const Matrix a = test::random_matrix(5, 4, rng);
    const Matrix b = test::random_matrix(4, 3, rng);
    const Matrix c = matmul(a, b);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k) {
                s += a(i, k) * b(k, j);
            }
            EXPECT_NEAR(c(i, j), s, 1e-12);
        }
    }
}

TEST(Matrix, TransposedProductsAgreeWithExplicitTranspose) {
    std::mt19937_64 rng(4);
    const Matrix a = test::random_matrix(6, 3, rng);
    const Matrix b = test::random_matrix(6, 2, rng);
    const Matrix c = test::random_matrix(5, 3, rng);
    Matrix at(3, 6);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            at(j, i) = a(i, j);
        }
    }
    Matrix ct(3, 5);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            ct(j, i) = c(i, j);
        }
    }
    EXPECT_LT(max_abs_diff(matmul_at_b(a, b), matmul(at, b)), 1e-12);
    EXPECT_LT(max_abs_diff(matmul_a_bt(a, c), matmul(a, ct)), 1e-12);
}

TEST(Matrix, RowHelpers) {
    Matrix m{{1, 2}, {3, 4}, {5, 6}};
    const std::vector<std::size_t> idx{2, 0};
    const Matrix s = select_rows(m, idx);
    EXPECT_EQ(s, (Matrix{{5, 6}, {1, 2}}));
    EXPECT_DOUBLE_EQ(dot(m.row(0), m.row(1)), 11.0);
    EXPECT_DOUBLE_EQ(squared_distance(m.row(0), m.row(2)), 32.0);
    axpy(2.0, m.row(0), m.row(1));
    EXPECT_EQ(m(1, 0), 5.0);
    EXPECT_EQ(m(1, 1), 8.0);
    m(0, 0) = std::nan("");
    EXPECT_FALSE(all_finite(m));
}

TEST(Matrix, AppendRow) {
    Matrix m;
    const std::vector<double> r{1.0, 2.0, 3.0};
    m.append_row(r);
    m.append_row(r);
    EXPECT_EQ(m.rows(), 2u);
    EXPECT_EQ(m.cols(), 3u);
    EXPECT_EQ(Matrix::identity(2), (Matrix{{1, 0}, {0, 1}}));
}
