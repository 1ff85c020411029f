#include "mstor/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mstor {

namespace {

std::string entry_str(index_t i, index_t j) {
    return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

}  // namespace

SparseMatrix::SparseMatrix(index_t rows, index_t cols,
                           std::vector<index_t> row_offsets,
                           std::vector<index_t> col_indices,
                           std::vector<double> values)
    : rows_(rows), cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    if (rows_ < 0 || cols_ < 0)
        throw DimensionError("matrix dimensions must be nonnegative");
    if (row_offsets_.size() != static_cast<size_t>(rows_) + 1)
        throw DimensionError("row_offsets must have rows+1 entries");
    if (row_offsets_.front() != 0)
        throw DimensionError("row_offsets[0] must be 0");
    if (row_offsets_.back() != static_cast<index_t>(values_.size()) ||
        col_indices_.size() != values_.size())
        throw DimensionError("row_offsets[rows] must equal nnz");
    for (index_t i = 0; i < rows_; ++i) {
        if (row_offsets_[i + 1] < row_offsets_[i])
            throw DimensionError("row_offsets must be nondecreasing");
        for (index_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            if (col_indices_[k] < 0 || col_indices_[k] >= cols_)
                throw DimensionError("column index out of range in row " + std::to_string(i));
            if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1])
                throw DimensionError("column indices must be strictly increasing in row " +
                                     std::to_string(i));
        }
    }
    for (double v : values_)
        if (!std::isfinite(v))
            throw DomainError("non-finite matrix entry");
}

SparseMatrix SparseMatrix::from_triplets(index_t rows, index_t cols,
                                         std::vector<Triplet> triplets) {
    for (const Triplet& t : triplets) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw DimensionError("triplet " + entry_str(t.row, t.col) + " out of range");
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    std::vector<index_t> offsets(static_cast<size_t>(rows) + 1, 0);
    std::vector<index_t> colidx;
    std::vector<double> vals;
    colidx.reserve(triplets.size());
    vals.reserve(triplets.size());

    size_t k = 0;
    while (k < triplets.size()) {
        index_t r = triplets[k].row, c = triplets[k].col;
        double v = triplets[k].value;
        ++k;
        while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) {
            v += triplets[k].value;
            ++k;
        }
        if (v != 0.0) {
            colidx.push_back(c);
            vals.push_back(v);
            ++offsets[static_cast<size_t>(r) + 1];
        }
    }
    for (index_t i = 0; i < rows; ++i)
        offsets[static_cast<size_t>(i) + 1] += offsets[static_cast<size_t>(i)];
    return SparseMatrix(rows, cols, std::move(offsets), std::move(colidx), std::move(vals));
}

SparseMatrix SparseMatrix::identity(index_t n) {
    std::vector<index_t> offsets(static_cast<size_t>(n) + 1);
    std::vector<index_t> colidx(static_cast<size_t>(n));
    std::vector<double> vals(static_cast<size_t>(n), 1.0);
    for (index_t i = 0; i <= n; ++i) offsets[static_cast<size_t>(i)] = i;
    for (index_t i = 0; i < n; ++i) colidx[static_cast<size_t>(i)] = i;
    return SparseMatrix(n, n, std::move(offsets), std::move(colidx), std::move(vals));
}

SparseMatrix SparseMatrix::diagonal(const DenseVector& d) {
    const index_t n = static_cast<index_t>(d.size());
    std::vector<Triplet> trips;
    trips.reserve(d.size());
    for (index_t i = 0; i < n; ++i)
        if (d[static_cast<size_t>(i)] != 0.0)
            trips.push_back({i, i, d[static_cast<size_t>(i)]});
    return from_triplets(n, n, std::move(trips));
}

SparseMatrix SparseMatrix::zeros(index_t rows, index_t cols) {
    return SparseMatrix(rows, cols, std::vector<index_t>(static_cast<size_t>(rows) + 1, 0), {}, {});
}

std::span<const index_t> SparseMatrix::row_cols(index_t i) const {
    const size_t b = static_cast<size_t>(row_offsets_[static_cast<size_t>(i)]);
    const size_t e = static_cast<size_t>(row_offsets_[static_cast<size_t>(i) + 1]);
    return {col_indices_.data() + b, e - b};
}

std::span<const double> SparseMatrix::row_vals(index_t i) const {
    const size_t b = static_cast<size_t>(row_offsets_[static_cast<size_t>(i)]);
    const size_t e = static_cast<size_t>(row_offsets_[static_cast<size_t>(i) + 1]);
    return {values_.data() + b, e - b};
}

double SparseMatrix::at(index_t i, index_t j) const {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
        throw DimensionError("entry " + entry_str(i, j) + " out of range");
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return row_vals(i)[static_cast<size_t>(it - cols.begin())];
}

void SparseMatrix::multiply_into(const DenseVector& x, DenseVector& y) const {
    if (static_cast<index_t>(x.size()) != cols_)
        throw DimensionError("multiply: vector length " + std::to_string(x.size()) +
                             " does not match " + std::to_string(cols_) + " columns");
    y.assign(static_cast<size_t>(rows_), 0.0);
    for (index_t i = 0; i < rows_; ++i) {
        double acc = 0.0;
        for (index_t k = row_offsets_[static_cast<size_t>(i)];
             k < row_offsets_[static_cast<size_t>(i) + 1]; ++k)
            acc += values_[static_cast<size_t>(k)] *
                   x[static_cast<size_t>(col_indices_[static_cast<size_t>(k)])];
        y[static_cast<size_t>(i)] = acc;
    }
}

DenseVector SparseMatrix::multiply(const DenseVector& x) const {
    DenseVector y;
    multiply_into(x, y);
    return y;
}

DenseVector SparseMatrix::diag() const {
    const index_t n = std::min(rows_, cols_);
    DenseVector d(static_cast<size_t>(n), 0.0);
    for (index_t i = 0; i < n; ++i) d[static_cast<size_t>(i)] = at(i, i);
    return d;
}

double SparseMatrix::norm_inf() const {
    double m = 0.0;
    for (index_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (double v : row_vals(i)) s += std::abs(v);
        m = std::max(m, s);
    }
    return m;
}

double SparseMatrix::min_value() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : values_) m = std::min(m, v);
    return m;
}

SparseMatrix abs_matrix(const SparseMatrix& a) {
    std::vector<double> vals = a.values();
    for (double& v : vals) v = std::abs(v);
    return SparseMatrix(a.rows(), a.cols(), a.row_offsets(), a.col_indices(), std::move(vals));
}

SparseMatrix comparison_matrix(const SparseMatrix& a) {
    if (!a.square())
        throw DimensionError("comparison matrix requires a square input");
    std::vector<double> vals = a.values();
    const auto& offsets = a.row_offsets();
    const auto& cols = a.col_indices();
    for (index_t i = 0; i < a.rows(); ++i) {
        for (index_t k = offsets[static_cast<size_t>(i)];
             k < offsets[static_cast<size_t>(i) + 1]; ++k) {
            double v = std::abs(vals[static_cast<size_t>(k)]);
            vals[static_cast<size_t>(k)] = cols[static_cast<size_t>(k)] == i ? v : -v;
        }
    }
    return SparseMatrix(a.rows(), a.cols(), offsets, cols, std::move(vals));
}

namespace {

// Walks the union pattern of two CSR matrices row by row.
template <class F>
void merge_rows(const SparseMatrix& a, const SparseMatrix& b, F&& emit) {
    for (index_t i = 0; i < a.rows(); ++i) {
        auto ac = a.row_cols(i);
        auto av = a.row_vals(i);
        auto bc = b.row_cols(i);
        auto bv = b.row_vals(i);
        size_t ka = 0, kb = 0;
        while (ka < ac.size() || kb < bc.size()) {
            index_t ja = ka < ac.size() ? ac[ka] : std::numeric_limits<index_t>::max();
            index_t jb = kb < bc.size() ? bc[kb] : std::numeric_limits<index_t>::max();
            if (ja < jb) {
                emit(i, ja, &av[ka], nullptr);
                ++ka;
            } else if (jb < ja) {
                emit(i, jb, nullptr, &bv[kb]);
                ++kb;
            } else {
                emit(i, ja, &av[ka], &bv[kb]);
                ++ka;
                ++kb;
            }
        }
    }
}

void require_same_shape(const SparseMatrix& a, const SparseMatrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError(std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()) + " differ");
}

}  // namespace

SparseMatrix linear_combination(double ca, const SparseMatrix& a, double cb,
                                const SparseMatrix& b) {
    require_same_shape(a, b, "linear_combination");
    std::vector<index_t> offsets(static_cast<size_t>(a.rows()) + 1, 0);
    std::vector<index_t> colidx;
    std::vector<double> vals;
    merge_rows(a, b, [&](index_t i, index_t j, const double* va, const double* vb) {
        double v;
        if (va && vb)
            v = ca * *va + cb * *vb;
        else if (va)
            v = ca * *va;
        else
            v = cb * *vb;
        if (v != 0.0) {
            colidx.push_back(j);
            vals.push_back(v);
            ++offsets[static_cast<size_t>(i) + 1];
        }
    });
    for (index_t i = 0; i < a.rows(); ++i)
        offsets[static_cast<size_t>(i) + 1] += offsets[static_cast<size_t>(i)];
    return SparseMatrix(a.rows(), a.cols(), std::move(offsets), std::move(colidx), std::move(vals));
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b) {
    return linear_combination(1.0, a, 1.0, b);
}

SparseMatrix subtract(const SparseMatrix& a, const SparseMatrix& b) {
    return linear_combination(1.0, a, -1.0, b);
}

SparseMatrix row_scale(const SparseMatrix& a, const DenseVector& s) {
    if (static_cast<index_t>(s.size()) != a.rows())
        throw DimensionError("row_scale: scale length does not match row count");
    std::vector<double> vals = a.values();
    const auto& offsets = a.row_offsets();
    for (index_t i = 0; i < a.rows(); ++i)
        for (index_t k = offsets[static_cast<size_t>(i)];
             k < offsets[static_cast<size_t>(i) + 1]; ++k)
            vals[static_cast<size_t>(k)] *= s[static_cast<size_t>(i)];
    return SparseMatrix(a.rows(), a.cols(), offsets, a.col_indices(), std::move(vals));
}

bool equal_values(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    bool eq = true;
    merge_rows(a, b, [&](index_t, index_t, const double* va, const double* vb) {
        double x = va ? *va : 0.0;
        double y = vb ? *vb : 0.0;
        if (x != y) eq = false;
    });
    return eq;
}

double max_abs_diff(const SparseMatrix& a, const SparseMatrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    merge_rows(a, b, [&](index_t, index_t, const double* va, const double* vb) {
        double x = va ? *va : 0.0;
        double y = vb ? *vb : 0.0;
        m = std::max(m, std::abs(x - y));
    });
    return m;
}

void lower_triangular_solve_inplace(const SparseMatrix& L, DenseVector& x) {
    if (!L.square())
        throw DimensionError("triangular solve requires a square matrix");
    if (static_cast<index_t>(x.size()) != L.rows())
        throw DimensionError("triangular solve: right-hand side length mismatch");
    for (index_t i = 0; i < L.rows(); ++i) {
        auto cols = L.row_cols(i);
        auto vals = L.row_vals(i);
        double acc = x[static_cast<size_t>(i)];
        double d = 0.0;
        bool have_diag = false;
        for (size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] < i) {
                acc -= vals[k] * x[static_cast<size_t>(cols[k])];
            } else if (cols[k] == i) {
                d = vals[k];
                have_diag = true;
            } else {
                throw DomainError("matrix is not lower triangular: entry " +
                                  entry_str(i, cols[k]));
            }
        }
        if (!have_diag || d == 0.0)
            throw SingularMatrixError("zero or missing diagonal entry in row " +
                                      std::to_string(i));
        x[static_cast<size_t>(i)] = acc / d;
    }
}

DenseVector lower_triangular_solve(const SparseMatrix& L, const DenseVector& b) {
    DenseVector x = b;
    lower_triangular_solve_inplace(L, x);
    return x;
}

double norm_inf(const DenseVector& v) {
    double m = 0.0;
    for (double t : v) m = std::max(m, std::abs(t));
    return m;
}

void require_finite(const DenseVector& v, const std::string& what) {
    for (size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i]))
            throw DomainError(what + ": non-finite value at index " + std::to_string(i));
}

DenseVector vec_subtract(const DenseVector& a, const DenseVector& b) {
    if (a.size() != b.size())
        throw DimensionError("vector subtraction: length mismatch");
    DenseVector r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

double max_abs_diff(const DenseVector& a, const DenseVector& b) {
    if (a.size() != b.size())
        throw DimensionError("max_abs_diff: length mismatch");
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace mstor
