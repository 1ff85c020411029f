#include "mstor/spectral.hpp"

#include <cmath>

namespace mstor {

namespace {

double power_iteration(index_t n,
                       const std::function<void(const DenseVector&, DenseVector&)>& op,
                       double eps, double tol, long max_iters) {
    if (n == 0) return 0.0;
    DenseVector x(static_cast<size_t>(n), 1.0);
    DenseVector y(static_cast<size_t>(n));
    double lam_prev = 0.0, lam_last = 0.0;
    bool have_prev = false;
    for (long k = 0; k < max_iters; ++k) {
        op(x, y);
        if (eps > 0.0)
            for (size_t i = 0; i < y.size(); ++i) y[i] += eps * x[i];
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            num += x[i] * y[i];
            den += x[i] * x[i];
        }
        const double lam = num / den;
        const double ynorm = norm_inf(y);
        if (ynorm == 0.0) return 0.0;  // positive x annihilated: the operator is zero
        for (size_t i = 0; i < y.size(); ++i) y[i] /= ynorm;
        x.swap(y);
        if (have_prev && std::abs(lam - lam_last) <= 0.1 * tol * std::max(1.0, std::abs(lam)))
            return std::max(0.0, lam - eps);
        lam_prev = lam_last;
        lam_last = lam;
        have_prev = true;
    }
    throw IterationLimitError("power iteration did not settle in " + std::to_string(max_iters) +
                                  " iterations (last estimates " + std::to_string(lam_prev) +
                                  ", " + std::to_string(lam_last) + ")",
                              lam_prev, lam_last);
}

}  // namespace

double spectral_radius_nonneg(const SparseMatrix& m, double tol, long max_iters) {
    if (!m.square())
        throw DimensionError("spectral radius requires a square matrix");
    for (double v : m.values())
        if (v < 0.0)
            throw DomainError("spectral_radius_nonneg: negative entry " + std::to_string(v));
    const double norm = m.norm_inf();
    if (norm == 0.0) return 0.0;
    const double eps = 1e-14 * norm;
    return power_iteration(
        m.rows(), [&m](const DenseVector& x, DenseVector& y) { m.multiply_into(x, y); }, eps, tol,
        max_iters);
}

double spectral_radius_nonneg_op(index_t n,
                                 const std::function<void(const DenseVector&, DenseVector&)>& op,
                                 double norm_hint, double tol, long max_iters) {
    const double eps = 1e-14 * std::max(norm_hint, 0.0);
    return power_iteration(n, op, eps, tol, max_iters);
}

}  // namespace mstor
