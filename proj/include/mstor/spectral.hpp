// Spectral radius of nonnegative matrices and operators by shifted power iteration.
#pragma once

#include <functional>

#include "mstor/sparse.hpp"

namespace mstor {

// Power iteration from the all-ones vector with a virtual +eps*I shift,
// eps = 1e-14 * ||M||_inf, subtracted from the returned estimate. Stops when
// successive Rayleigh estimates agree to 0.1*tol; raises IterationLimitError
// (carrying the last two estimates) at max_iters. Negative entries raise DomainError.
double spectral_radius_nonneg(const SparseMatrix& m, double tol = 1e-10,
                              long max_iters = 100000);

// Same iteration for a matrix-free nonnegative operator y = op(x).
// norm_hint scales the virtual shift; pass an estimate of ||Op||_inf.
double spectral_radius_nonneg_op(index_t n,
                                 const std::function<void(const DenseVector&, DenseVector&)>& op,
                                 double norm_hint, double tol = 1e-10,
                                 long max_iters = 100000);

}  // namespace mstor
