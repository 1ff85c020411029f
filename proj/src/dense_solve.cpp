#include "mstor/dense_solve.hpp"

#include <cmath>

namespace mstor {

DenseLU::DenseLU(const SparseMatrix& a) {
    if (!a.square())
        throw DimensionError("dense LU requires a square matrix");
    if (a.rows() > kMaxDim)
        throw CapacityError("dense solve limited to n <= " + std::to_string(kMaxDim) +
                            ", got n = " + std::to_string(a.rows()));
    n_ = a.rows();
    const size_t n = static_cast<size_t>(n_);
    lu_.assign(n * n, 0.0);
    perm_.resize(n);
    for (index_t i = 0; i < n_; ++i) {
        perm_[static_cast<size_t>(i)] = i;
        auto cols = a.row_cols(i);
        auto vals = a.row_vals(i);
        for (size_t k = 0; k < cols.size(); ++k)
            lu_[static_cast<size_t>(i) * n + static_cast<size_t>(cols[k])] = vals[k];
    }

    const double pivot_floor = 1e-14 * a.norm_inf();
    for (index_t k = 0; k < n_; ++k) {
        index_t piv = k;
        double best = std::abs(lu_[static_cast<size_t>(k) * n + static_cast<size_t>(k)]);
        for (index_t i = k + 1; i < n_; ++i) {
            double c = std::abs(lu_[static_cast<size_t>(i) * n + static_cast<size_t>(k)]);
            if (c > best) {
                best = c;
                piv = i;
            }
        }
        if (best <= pivot_floor)
            throw SingularMatrixError("numerically singular: pivot " + std::to_string(best) +
                                      " at column " + std::to_string(k));
        if (piv != k) {
            for (index_t j = 0; j < n_; ++j)
                std::swap(lu_[static_cast<size_t>(k) * n + static_cast<size_t>(j)],
                          lu_[static_cast<size_t>(piv) * n + static_cast<size_t>(j)]);
            std::swap(perm_[static_cast<size_t>(k)], perm_[static_cast<size_t>(piv)]);
        }
        const double d = lu_[static_cast<size_t>(k) * n + static_cast<size_t>(k)];
        for (index_t i = k + 1; i < n_; ++i) {
            double& m = lu_[static_cast<size_t>(i) * n + static_cast<size_t>(k)];
            m /= d;
            if (m != 0.0)
                for (index_t j = k + 1; j < n_; ++j)
                    lu_[static_cast<size_t>(i) * n + static_cast<size_t>(j)] -=
                        m * lu_[static_cast<size_t>(k) * n + static_cast<size_t>(j)];
        }
    }
}

DenseVector DenseLU::solve(const DenseVector& b) const {
    if (static_cast<index_t>(b.size()) != n_)
        throw DimensionError("dense solve: right-hand side length mismatch");
    const size_t n = static_cast<size_t>(n_);
    DenseVector x(n);
    for (size_t i = 0; i < n; ++i) x[i] = b[static_cast<size_t>(perm_[i])];
    for (size_t i = 1; i < n; ++i) {
        double acc = x[i];
        for (size_t j = 0; j < i; ++j) acc -= lu_[i * n + j] * x[j];
        x[i] = acc;
    }
    for (size_t ii = n; ii-- > 0;) {
        double acc = x[ii];
        for (size_t j = ii + 1; j < n; ++j) acc -= lu_[ii * n + j] * x[j];
        x[ii] = acc / lu_[ii * n + ii];
    }
    return x;
}

std::vector<double> DenseLU::inverse() const {
    const size_t n = static_cast<size_t>(n_);
    std::vector<double> inv(n * n);
    DenseVector e(n, 0.0);
    for (size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        DenseVector col = solve(e);
        e[j] = 0.0;
        for (size_t i = 0; i < n; ++i) inv[i * n + j] = col[i];
    }
    return inv;
}

DenseVector dense_lu_solve(const SparseMatrix& a, const DenseVector& b) {
    return DenseLU(a).solve(b);
}

}  // namespace mstor
