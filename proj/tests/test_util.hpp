#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mstor/sparse.hpp"

namespace mstor::test {

inline SparseMatrix mat(index_t rows, index_t cols, std::vector<Triplet> t) {
    return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

// Strictly diagonally dominant with random sparsity; off-diagonal signs are
// random, so the result is an H-matrix but usually not an M-matrix.
inline SparseMatrix random_dominant(std::mt19937_64& rng, index_t n, double density,
                                    double dominance) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Triplet> t;
    std::vector<double> row_sum(static_cast<size_t>(n), 0.0);
    for (index_t i = 0; i < n; ++i) {
        for (index_t j = 0; j < n; ++j) {
            if (i == j || unit(rng) >= density) continue;
            const double v = unit(rng) * 2.0 - 1.0;
            t.push_back({i, j, v});
            row_sum[static_cast<size_t>(i)] += std::abs(v);
        }
    }
    for (index_t i = 0; i < n; ++i)
        t.push_back({i, i, dominance * (row_sum[static_cast<size_t>(i)] + 1.0)});
    return SparseMatrix::from_triplets(n, n, std::move(t));
}

// tridiag(-1, 2, -1).
inline SparseMatrix tridiag(index_t n) {
    std::vector<Triplet> t;
    for (index_t i = 0; i < n; ++i) {
        t.push_back({i, i, 2.0});
        if (i > 0) t.push_back({i, i - 1, -1.0});
        if (i + 1 < n) t.push_back({i, i + 1, -1.0});
    }
    return SparseMatrix::from_triplets(n, n, std::move(t));
}

inline bool contains(const std::string& s, const std::string& needle) {
    return s.find(needle) != std::string::npos;
}

}  // namespace mstor::test
