// Convergence-hypothesis validation for the two sufficient regimes and the
// admissible relaxation-parameter bound derived from them.
#pragma once

#include <string>
#include <vector>

#include "mstor/splitting.hpp"

namespace mstor {

enum class Regime { HMatrix, Monotone };

const char* to_string(Regime k);

struct HypothesisCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct HypothesisReport {
    Regime regime = Regime::HMatrix;
    std::vector<HypothesisCheck> checks;
    double rho_value = 0.0;
    double parameter_upper_bound = 0.0;  // positive whenever all checks pass
    std::vector<std::string> warnings;

    bool all_passed() const;
    const HypothesisCheck* find(const std::string& name) const;
};

// H-matrix regime: A an H-matrix, rho(<A>^-1 P) < 1, <A> = <B_l> - |C_l|,
// D_l = diag(A), <B_l> = |D_l| - |V_l| - |V_l*| - |U_l|. rho_value is the
// Jacobi-style estimate rho(|D|^-1 (|B| + P)) with B = D - A, and
// parameter_upper_bound = 4 / (1 + rho_value).
HypothesisReport validate_h_hypotheses(const SparseMatrix& a, const MultiSplitting& ms,
                                       const SparseMatrix& p);

// Monotone regime: A monotone, rho(A^-1 P) < 1, each (B_l, C_l) a regular
// splitting, and D_l, V_l, V_l*, U_l >= 0. parameter_upper_bound = 2.
HypothesisReport validate_monotone_hypotheses(const SparseMatrix& a, const MultiSplitting& ms,
                                              const SparseMatrix& p);

// The admissible upper bound on alpha + beta for the chosen regime.
double tor_parameter_bound(const SparseMatrix& a, const SparseMatrix& p, Regime kind);

}  // namespace mstor
