#include "mstor/hypotheses.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mstor/classify.hpp"
#include "mstor/dense_solve.hpp"
#include "mstor/spectral.hpp"

namespace mstor {

const char* to_string(Regime k) {
    return k == Regime::HMatrix ? "h-matrix" : "monotone";
}

bool HypothesisReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return !checks.empty();
}

const HypothesisCheck* HypothesisReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

void require_problem_shapes(const SparseMatrix& a, const MultiSplitting& ms,
                            const SparseMatrix& p) {
    if (!a.square()) throw DimensionError("hypothesis validation requires a square matrix");
    if (p.rows() != a.rows() || p.cols() != a.cols())
        throw DimensionError("bound matrix shape does not match A");
    if (!p.is_nonnegative()) throw DomainError("bound matrix must be nonnegative");
    if (ms.dim() != a.rows() && ms.p > 0)
        throw DimensionError("multi-splitting dimension does not match A");
}

// |D|^-1 (|B| + P) with B = D - A; the Jacobi-style matrix behind the bound.
SparseMatrix jacobi_style_matrix(const SparseMatrix& a, const SparseMatrix& p) {
    DenseVector d = a.diag();
    DenseVector inv_absd(d.size());
    for (size_t i = 0; i < d.size(); ++i) {
        if (d[i] == 0.0)
            throw SingularMatrixError("zero diagonal entry in row " + std::to_string(i));
        inv_absd[i] = 1.0 / std::abs(d[i]);
    }
    SparseMatrix off = subtract(SparseMatrix::diagonal(d), a);  // D - A: negated off-diagonal
    return row_scale(add(abs_matrix(off), p), inv_absd);
}

// rho of the nonnegative operator x -> Ainv (P x); requires Ainv >= 0.
// Tiny negative roundoff from the factorization is clamped.
double rho_inverse_times(const DenseLU& lu, const SparseMatrix& p, double tol) {
    DenseVector px;
    auto op = [&](const DenseVector& x, DenseVector& y) {
        p.multiply_into(x, px);
        y = lu.solve(px);
        for (double& v : y)
            if (v < 0.0) v = 0.0;
    };
    // Crude norm hint for the virtual shift.
    DenseVector ones(static_cast<size_t>(lu.dim()), 1.0);
    DenseVector probe;
    op(ones, probe);
    return spectral_radius_nonneg_op(lu.dim(), op, norm_inf(probe), tol);
}

constexpr double kEntryRelTol = 1e-14;

}  // namespace

HypothesisReport validate_h_hypotheses(const SparseMatrix& a, const MultiSplitting& ms,
                                       const SparseMatrix& p) {
    require_problem_shapes(a, ms, p);
    HypothesisReport rep;
    rep.regime = Regime::HMatrix;
    const double scale = std::max(1.0, a.norm_inf());

    // (a) A is an H-matrix.
    MatrixClassReport h = is_h_matrix(a);
    rep.checks.push_back({"A-is-H-matrix", h.is_h_matrix,
                          h.is_h_matrix ? std::string("established by ") + to_string(h.method)
                                        : h.reason});

    // rho estimate and the bound derived from it.
    double rho_suff = std::numeric_limits<double>::quiet_NaN();
    std::string rho_detail;
    try {
        rho_suff = spectral_radius_nonneg(jacobi_style_matrix(a, p));
        rho_detail = "rho(|D|^-1(|B|+P)) = " + fmt(rho_suff);
    } catch (const Error& e) {
        rho_detail = std::string("estimate failed: ") + e.what();
    }

    bool rho_ok = std::isfinite(rho_suff) && rho_suff < 1.0;
    if (h.is_h_matrix && a.rows() <= DenseLU::kMaxDim) {
        try {
            DenseLU lu(comparison_matrix(a));
            const double rho_dense = rho_inverse_times(lu, p, 1e-10);
            rho_detail += "; dense rho(<A>^-1 P) = " + fmt(rho_dense);
            rho_ok = rho_dense < 1.0;
        } catch (const Error& e) {
            rho_detail += std::string("; dense check unavailable: ") + e.what();
        }
    }
    rep.checks.push_back({"rho(<A>^-1 P) < 1", rho_ok, rho_detail});

    // (c) <A> = <B_l> - |C_l| for every l.
    {
        const SparseMatrix comp_a = comparison_matrix(a);
        double worst = 0.0;
        for (index_t l = 0; l < ms.p; ++l) {
            const size_t lu = static_cast<size_t>(l);
            worst = std::max(worst,
                             max_abs_diff(comp_a, subtract(comparison_matrix(ms.splits[lu].B),
                                                           abs_matrix(ms.C[lu]))));
        }
        rep.checks.push_back({"<A> = <B_l> - |C_l|", worst <= kEntryRelTol * scale,
                              "max deviation " + fmt(worst)});
    }

    // (d) every D_l equals diag(A).
    {
        const SparseMatrix d_of_a = SparseMatrix::diagonal(a.diag());
        double worst = 0.0;
        for (index_t l = 0; l < ms.p; ++l)
            worst = std::max(worst, max_abs_diff(d_of_a, ms.splits[static_cast<size_t>(l)].D));
        rep.checks.push_back({"D_l = diag(A)", worst <= kEntryRelTol * scale,
                              "max deviation " + fmt(worst)});
    }

    // (e) <B_l> = |D_l| - |V_l| - |V_l*| - |U_l|.
    {
        double worst = 0.0;
        for (index_t l = 0; l < ms.p; ++l) {
            const TwoStageSplit& s = ms.splits[static_cast<size_t>(l)];
            SparseMatrix rhs = subtract(
                subtract(subtract(abs_matrix(s.D), abs_matrix(s.V)), abs_matrix(s.V_star)),
                abs_matrix(s.U));
            worst = std::max(worst, max_abs_diff(comparison_matrix(s.B), rhs));
        }
        rep.checks.push_back({"<B_l> = |D_l| - |V_l| - |V_l*| - |U_l|",
                              worst <= kEntryRelTol * scale, "max deviation " + fmt(worst)});
    }

    rep.rho_value = rho_suff;
    rep.parameter_upper_bound =
        std::isfinite(rho_suff) ? 4.0 / (1.0 + rho_suff) : 0.0;
    return rep;
}

HypothesisReport validate_monotone_hypotheses(const SparseMatrix& a, const MultiSplitting& ms,
                                              const SparseMatrix& p) {
    require_problem_shapes(a, ms, p);
    HypothesisReport rep;
    rep.regime = Regime::Monotone;

    // (a) A monotone.
    MatrixClassReport mono = is_monotone_matrix(a);
    rep.checks.push_back({"A-monotone", mono.is_monotone,
                          mono.is_monotone ? std::string("established by ") + to_string(mono.method)
                                           : mono.reason});

    // (b) rho(A^-1 P) < 1.
    double rho = std::numeric_limits<double>::quiet_NaN();
    std::string rho_detail;
    bool rho_ok = false;
    if (mono.is_monotone && a.rows() <= DenseLU::kMaxDim) {
        try {
            DenseLU lu(a);
            rho = rho_inverse_times(lu, p, 1e-10);
            rho_detail = "dense rho(A^-1 P) = " + fmt(rho);
            rho_ok = rho < 1.0;
        } catch (const Error& e) {
            rho_detail = std::string("dense estimate failed: ") + e.what();
        }
    } else {
        try {
            rho = spectral_radius_nonneg(jacobi_style_matrix(a, p));
            rho_detail = "sufficient estimate rho(|D|^-1(|B|+P)) = " + fmt(rho);
            rho_ok = std::isfinite(rho) && rho < 1.0;
        } catch (const Error& e) {
            rho_detail = std::string("estimate failed: ") + e.what();
        }
    }
    rep.checks.push_back({"rho(A^-1 P) < 1", rho_ok, rho_detail});

    // (c) each (B_l, C_l) is a regular splitting: B_l^-1 >= 0 and C_l >= 0.
    {
        bool ok = true;
        std::string detail = "all splittings regular";
        for (index_t l = 0; l < ms.p && ok; ++l) {
            const size_t lu = static_cast<size_t>(l);
            if (ms.C[lu].min_value() < 0.0) {
                ok = false;
                detail = "C_" + std::to_string(l) + " has a negative entry";
                break;
            }
            MatrixClassReport binv = is_monotone_matrix(ms.splits[lu].B);
            if (!binv.is_monotone) {
                ok = false;
                detail = "B_" + std::to_string(l) + " is not inverse-nonnegative: " + binv.reason;
            }
        }
        rep.checks.push_back({"regular splittings (B_l^-1 >= 0, C_l >= 0)", ok, detail});
    }

    // (d) D_l, V_l, V_l*, U_l >= 0.
    {
        bool ok = true;
        std::string detail = "all parts nonnegative";
        for (index_t l = 0; l < ms.p && ok; ++l) {
            const TwoStageSplit& s = ms.splits[static_cast<size_t>(l)];
            const char* part = nullptr;
            if (s.D.min_value() < 0.0) part = "D";
            else if (s.V.min_value() < 0.0) part = "V";
            else if (s.V_star.min_value() < 0.0) part = "V*";
            else if (s.U.min_value() < 0.0) part = "U";
            if (part) {
                ok = false;
                detail = std::string(part) + "_" + std::to_string(l) + " has a negative entry";
            }
        }
        rep.checks.push_back({"D_l, V_l, V_l*, U_l >= 0", ok, detail});
    }

    rep.rho_value = rho;
    rep.parameter_upper_bound = 2.0;
    return rep;
}

double tor_parameter_bound(const SparseMatrix& a, const SparseMatrix& p, Regime kind) {
    if (!a.square()) throw DimensionError("parameter bound requires a square matrix");
    if (p.rows() != a.rows() || p.cols() != a.cols())
        throw DimensionError("bound matrix shape does not match A");
    if (!p.is_nonnegative()) throw DomainError("bound matrix must be nonnegative");
    if (kind == Regime::Monotone) return 2.0;
    const double rho = spectral_radius_nonneg(jacobi_style_matrix(a, p));
    return 4.0 / (1.0 + rho);
}

}  // namespace mstor
