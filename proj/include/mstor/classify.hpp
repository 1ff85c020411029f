// M-matrix, H-matrix, and monotonicity tests with positivity witnesses.
#pragma once

#include <optional>
#include <string>

#include "mstor/sparse.hpp"

namespace mstor {

enum class ClassifyMethod { None, DiagonalDominance, ScalingIteration, DenseInverse };

struct MatrixClassReport {
    bool is_m_matrix = false;
    bool is_h_matrix = false;
    bool is_monotone = false;
    // When present: u > 0 with min_i (<A>u)_i > 1e-12 * ||<A>||_inf * ||u||_inf.
    std::optional<DenseVector> witness;
    ClassifyMethod method = ClassifyMethod::None;
    std::string reason;  // why the verdict is negative or indeterminate
};

// Three tiers: strict diagonal dominance; Neumann-series scaling iteration
// (up to 10n steps); dense inverse for n <= 2000. Positive off-diagonal or
// nonpositive diagonal entries disqualify immediately with a reason.
MatrixClassReport is_m_matrix(const SparseMatrix& a);

// A is an H-matrix iff <A> is a nonsingular M-matrix.
MatrixClassReport is_h_matrix(const SparseMatrix& a);

// Dense inverse check (n <= 2000), falling back to the M-matrix sufficient test.
MatrixClassReport is_monotone_matrix(const SparseMatrix& a);

const char* to_string(ClassifyMethod m);

}  // namespace mstor
