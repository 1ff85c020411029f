#include "mstor/classify.hpp"

#include <cmath>
#include <limits>

#include "mstor/dense_solve.hpp"

namespace mstor {

namespace {

constexpr double kWitnessRel = 1e-12;
constexpr double kInverseFloor = -1e-12;

// min_i (A u)_i > 1e-12 * ||A||_inf * ||u||_inf, the numeric witness criterion.
bool witness_holds(const SparseMatrix& a, const DenseVector& u, double a_norm) {
    DenseVector r = a.multiply(u);
    double mn = std::numeric_limits<double>::infinity();
    for (double v : r) mn = std::min(mn, v);
    return mn > kWitnessRel * a_norm * norm_inf(u);
}

void store_witness(MatrixClassReport& rep, const SparseMatrix& a, DenseVector u, double a_norm) {
    const double s = norm_inf(u);
    if (s > 0.0)
        for (double& v : u) v /= s;
    if (witness_holds(a, u, a_norm)) rep.witness = std::move(u);
}

}  // namespace

const char* to_string(ClassifyMethod m) {
    switch (m) {
        case ClassifyMethod::DiagonalDominance: return "diagonal-dominance";
        case ClassifyMethod::ScalingIteration: return "scaling-iteration";
        case ClassifyMethod::DenseInverse: return "dense-inverse";
        default: return "none";
    }
}

MatrixClassReport is_m_matrix(const SparseMatrix& a) {
    if (!a.square())
        throw DimensionError("M-matrix test requires a square matrix");
    MatrixClassReport rep;
    const index_t n = a.rows();
    if (n == 0) {
        rep.is_m_matrix = rep.is_monotone = true;
        rep.method = ClassifyMethod::DiagonalDominance;
        return rep;
    }

    for (index_t i = 0; i < n; ++i) {
        auto cols = a.row_cols(i);
        auto vals = a.row_vals(i);
        for (size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] != i && vals[k] > 0.0) {
                rep.reason = "positive off-diagonal entry at (" + std::to_string(i) + ", " +
                             std::to_string(cols[k]) + ")";
                return rep;
            }
        }
    }
    DenseVector d = a.diag();
    for (index_t i = 0; i < n; ++i) {
        if (d[static_cast<size_t>(i)] <= 0.0) {
            rep.reason = "nonpositive diagonal entry at row " + std::to_string(i);
            return rep;
        }
    }

    const double a_norm = a.norm_inf();

    // Tier 1: strict diagonal dominance, witness = ones.
    bool dominant = true;
    for (index_t i = 0; i < n && dominant; ++i) {
        auto cols = a.row_cols(i);
        auto vals = a.row_vals(i);
        double off = 0.0;
        for (size_t k = 0; k < cols.size(); ++k)
            if (cols[k] != i) off += std::abs(vals[k]);
        if (!(d[static_cast<size_t>(i)] > off)) dominant = false;
    }
    if (dominant) {
        rep.is_m_matrix = rep.is_monotone = true;
        rep.method = ClassifyMethod::DiagonalDominance;
        store_witness(rep, a, DenseVector(static_cast<size_t>(n), 1.0), a_norm);
        return rep;
    }

    // Tier 2: scaling iteration u <- D^-1 |offdiag| u + 1 (partial Neumann sums of the
    // Jacobi matrix). It reaches a strict witness Au > 0 iff A is a nonsingular M-matrix.
    {
        DenseVector u(static_cast<size_t>(n), 1.0);
        DenseVector t(static_cast<size_t>(n));
        const long cap = 10 * static_cast<long>(n);
        for (long step = 0; step < cap; ++step) {
            if (witness_holds(a, u, a_norm)) {
                rep.is_m_matrix = rep.is_monotone = true;
                rep.method = ClassifyMethod::ScalingIteration;
                store_witness(rep, a, std::move(u), a_norm);
                return rep;
            }
            for (index_t i = 0; i < n; ++i) {
                auto cols = a.row_cols(i);
                auto vals = a.row_vals(i);
                double acc = 0.0;
                for (size_t k = 0; k < cols.size(); ++k)
                    if (cols[k] != i)
                        acc += std::abs(vals[k]) * u[static_cast<size_t>(cols[k])];
                t[static_cast<size_t>(i)] = acc / d[static_cast<size_t>(i)] + 1.0;
            }
            u.swap(t);
            if (norm_inf(u) > 1e12) break;  // Neumann sums diverge: not an M-matrix, or nearly singular
        }
    }

    // Tier 3: dense inverse.
    if (n <= DenseLU::kMaxDim) {
        try {
            DenseLU lu(a);
            std::vector<double> inv = lu.inverse();
            for (size_t k = 0; k < inv.size(); ++k) {
                if (inv[k] < kInverseFloor) {
                    rep.reason = "inverse has a negative entry (" + std::to_string(inv[k]) +
                                 " at flat index " + std::to_string(k) + ")";
                    rep.method = ClassifyMethod::DenseInverse;
                    return rep;
                }
            }
            rep.is_m_matrix = rep.is_monotone = true;
            rep.method = ClassifyMethod::DenseInverse;
            store_witness(rep, a, lu.solve(DenseVector(static_cast<size_t>(n), 1.0)), a_norm);
            return rep;
        } catch (const SingularMatrixError& e) {
            rep.reason = std::string("numerically singular: ") + e.what();
            rep.method = ClassifyMethod::DenseInverse;
            return rep;
        }
    }

    rep.reason = "not established: dominance and scaling iteration were inconclusive and n > " +
                 std::to_string(DenseLU::kMaxDim) + " rules out the dense check";
    return rep;
}

MatrixClassReport is_h_matrix(const SparseMatrix& a) {
    const SparseMatrix comp = comparison_matrix(a);
    MatrixClassReport rep = is_m_matrix(comp);
    rep.is_h_matrix = rep.is_m_matrix;
    // A itself is an M-matrix only when it coincides with its comparison matrix.
    rep.is_m_matrix = rep.is_h_matrix && equal_values(a, comp);
    rep.is_monotone = rep.is_m_matrix;
    return rep;
}

MatrixClassReport is_monotone_matrix(const SparseMatrix& a) {
    if (!a.square())
        throw DimensionError("monotonicity test requires a square matrix");
    if (a.rows() <= DenseLU::kMaxDim) {
        MatrixClassReport rep;
        rep.method = ClassifyMethod::DenseInverse;
        try {
            DenseLU lu(a);
            std::vector<double> inv = lu.inverse();
            for (size_t k = 0; k < inv.size(); ++k) {
                if (inv[k] < kInverseFloor) {
                    rep.reason = "inverse has a negative entry (" + std::to_string(inv[k]) +
                                 " at flat index " + std::to_string(k) + ")";
                    return rep;
                }
            }
            rep.is_monotone = true;
            store_witness(rep, a, lu.solve(DenseVector(static_cast<size_t>(a.rows()), 1.0)),
                          a.norm_inf());
            return rep;
        } catch (const SingularMatrixError& e) {
            rep.reason = std::string("numerically singular: ") + e.what();
            return rep;
        }
    }
    MatrixClassReport rep = is_m_matrix(a);
    if (!rep.is_monotone && rep.reason.empty())
        rep.reason = "M-matrix sufficient test failed";
    return rep;
}

}  // namespace mstor
