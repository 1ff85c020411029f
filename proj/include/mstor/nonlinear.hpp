// Weakly nonlinear right-hand sides: maps G with a componentwise bound
// |G(x) - G(y)| <= P |x - y|, problem bundles, and the grid generator.
#pragma once

#include <functional>
#include <optional>
#include <string>

#include "mstor/sparse.hpp"

namespace mstor {

enum class Nonlinearity { Sine, Arctan, ExpDecay, Constant };

const char* to_string(Nonlinearity k);
Nonlinearity nonlinearity_from_string(const std::string& s);

// A map R^n -> R^n carrying its bound matrix P >= 0. The evaluator must be a
// pure function; it is only ever invoked from the controlling thread.
class BoundedMap {
public:
    using Evaluator = std::function<DenseVector(const DenseVector&)>;

    BoundedMap(index_t n, Evaluator evaluator, SparseMatrix p, std::string description);

    index_t dim() const { return n_; }
    const SparseMatrix& bound() const { return p_; }
    const std::string& description() const { return description_; }

    // Validates input length and output length/finiteness; DomainError names
    // the first non-finite output index.
    DenseVector operator()(const DenseVector& x) const;

private:
    index_t n_ = 0;
    Evaluator evaluator_;
    SparseMatrix p_;
    std::string description_;
};

inline DenseVector evaluate_map(const BoundedMap& g, const DenseVector& x) { return g(x); }

// G(x)_i = coupling * g(x_i) with P = coupling * I. The exponential-decay map is
// extended linearly below zero so its Lipschitz constant stays 1.
BoundedMap make_componentwise_map(Nonlinearity kind, index_t n, double coupling,
                                  double constant_value = 0.0);

struct PBoundReport {
    long samples = 0;
    long violations = 0;           // sample pairs with any component above the bound
    double worst_margin = 0.0;     // max over samples of max_i (|G(x)-G(y)| - P|x-y| - 1e-12)_i
    index_t worst_index = -1;
    DenseVector worst_x;
    DenseVector worst_y;
};

// Seeded sampling of pairs in [-radius, radius]^n. Deterministic for a given seed.
PBoundReport verify_p_bound(const BoundedMap& g, long samples, double radius,
                            std::uint64_t seed);

// Serializable recipe for the builtin componentwise maps.
struct NonlinearityRecipe {
    Nonlinearity kind = Nonlinearity::Constant;
    double coupling = 1.0;
    double constant_value = 0.0;
};

struct WeaklyNonlinearProblem {
    WeaklyNonlinearProblem(SparseMatrix a, BoundedMap g, std::string name,
                           std::optional<DenseVector> known_solution, bool generated);

    SparseMatrix A;
    BoundedMap G;
    std::string name;
    std::optional<DenseVector> known_solution;  // validated: ||Ax*-G(x*)||_inf <= 1e-10(1+||x*||_inf)
    bool generated = false;                     // provenance: generated vs loaded
    std::optional<NonlinearityRecipe> recipe;   // present for builtin maps
    std::vector<std::string> notes;

    index_t dim() const { return A.rows(); }
};

// Five-point Laplacian on the m*m interior grid of the unit square, scaled by
// 1/h^2 with h = 1/(m+1).
SparseMatrix grid_laplacian(index_t m);
double grid_laplacian_min_eigenvalue(index_t m);

// Generation fails (with the maximal safe coupling in the message) unless
// coupling < lambda_min(<A>), which guarantees rho(<A>^-1 P) < 1.
WeaklyNonlinearProblem generate_grid_problem(index_t m, Nonlinearity kind, double coupling,
                                             double constant_value = 0.0);

}  // namespace mstor
