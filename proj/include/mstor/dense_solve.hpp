// Dense LU with partial pivoting. This is the direct-solve oracle the iterative
// paths are checked against; it shares no code with them.
#pragma once

#include "mstor/sparse.hpp"

namespace mstor {

class DenseLU {
public:
    static constexpr index_t kMaxDim = 2000;

    // Densifies and factors immediately. Dimensions above kMaxDim raise
    // CapacityError; a pivot below 1e-14 * ||A||_inf raises SingularMatrixError.
    explicit DenseLU(const SparseMatrix& a);

    index_t dim() const { return n_; }
    DenseVector solve(const DenseVector& b) const;

    // Row-major inverse, n*n entries.
    std::vector<double> inverse() const;

private:
    index_t n_ = 0;
    std::vector<double> lu_;      // row-major, L below the diagonal, U on and above
    std::vector<index_t> perm_;   // row permutation
};

DenseVector dense_lu_solve(const SparseMatrix& a, const DenseVector& b);

}  // namespace mstor
