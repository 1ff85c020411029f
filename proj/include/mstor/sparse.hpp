// Compressed sparse row matrices and the dense-vector helpers used everywhere else.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mstor/errors.hpp"

namespace mstor {

using index_t = std::int64_t;
using DenseVector = std::vector<double>;

struct Triplet {
    index_t row;
    index_t col;
    double value;
};

// CSR storage. Invariants: row_offsets is nondecreasing with row_offsets[0] == 0 and
// row_offsets[rows] == nnz; column indices are strictly increasing within a row.
// Stored values may be zero only when inserted through the raw constructor;
// from_triplets sums duplicates and drops entries whose final value is 0.0.
class SparseMatrix {
public:
    SparseMatrix() = default;

    SparseMatrix(index_t rows, index_t cols,
                 std::vector<index_t> row_offsets,
                 std::vector<index_t> col_indices,
                 std::vector<double> values);

    static SparseMatrix from_triplets(index_t rows, index_t cols, std::vector<Triplet> triplets);
    static SparseMatrix identity(index_t n);
    static SparseMatrix diagonal(const DenseVector& d);  // zeros are dropped
    static SparseMatrix zeros(index_t rows, index_t cols);

    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }
    index_t nnz() const { return static_cast<index_t>(values_.size()); }
    bool square() const { return rows_ == cols_; }

    const std::vector<index_t>& row_offsets() const { return row_offsets_; }
    const std::vector<index_t>& col_indices() const { return col_indices_; }
    const std::vector<double>& values() const { return values_; }

    std::span<const index_t> row_cols(index_t i) const;
    std::span<const double> row_vals(index_t i) const;

    // 0.0 when the entry is not stored.
    double at(index_t i, index_t j) const;

    DenseVector multiply(const DenseVector& x) const;
    void multiply_into(const DenseVector& x, DenseVector& y) const;

    // Diagonal as a length-min(rows,cols) vector, 0 where absent.
    DenseVector diag() const;

    double norm_inf() const;  // max absolute row sum
    double min_value() const;  // min over stored values; +inf when empty
    bool is_nonnegative() const { return min_value() >= 0.0; }

private:
    index_t rows_ = 0;
    index_t cols_ = 0;
    std::vector<index_t> row_offsets_ = {0};
    std::vector<index_t> col_indices_;
    std::vector<double> values_;
};

// Same pattern, absolute values.
SparseMatrix abs_matrix(const SparseMatrix& a);

// Comparison matrix: |a_ii| on the diagonal, -|a_ij| off it. Square input only.
SparseMatrix comparison_matrix(const SparseMatrix& a);

// ca*a + cb*b over the union pattern; exact-zero results are dropped.
// Entries present on one side only are never multiplied against a phantom zero.
SparseMatrix linear_combination(double ca, const SparseMatrix& a, double cb, const SparseMatrix& b);
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix subtract(const SparseMatrix& a, const SparseMatrix& b);

// Rows scaled by s[i].
SparseMatrix row_scale(const SparseMatrix& a, const DenseVector& s);

// Bitwise equality over the union pattern (absent entries compare as 0.0).
bool equal_values(const SparseMatrix& a, const SparseMatrix& b);
// max |a_ij - b_ij| over the union pattern.
double max_abs_diff(const SparseMatrix& a, const SparseMatrix& b);

// Forward substitution. L must be lower triangular with every diagonal entry
// stored and nonzero; violations raise SingularMatrixError naming the row.
DenseVector lower_triangular_solve(const SparseMatrix& L, const DenseVector& b);
void lower_triangular_solve_inplace(const SparseMatrix& L, DenseVector& x);

// Vector helpers.
double norm_inf(const DenseVector& v);
void require_finite(const DenseVector& v, const std::string& what);
DenseVector vec_subtract(const DenseVector& a, const DenseVector& b);
double max_abs_diff(const DenseVector& a, const DenseVector& b);

}  // namespace mstor
