// The synchronous multi-splitting two-stage relaxation iteration and its presets.
#pragma once

#include <chrono>
#include <functional>
#include <optional>

#include "mstor/nonlinear.hpp"
#include "mstor/splitting.hpp"

namespace mstor {

// Inner sweep counts s_l(i); every produced value must be >= 1.
class InnerSchedule {
public:
    static InnerSchedule constant(long s);
    static InnerSchedule per_splitting(std::vector<long> s);
    static InnerSchedule function(std::function<long(index_t l, long outer)> f);

    long at(index_t l, long outer, index_t p) const;
    // Smallest constant value; nullopt for callback schedules.
    std::optional<long> min_constant() const;

private:
    InnerSchedule() = default;
    std::vector<long> values_;
    std::function<long(index_t, long)> fn_;
};

enum class MethodFamily { TOR, AOR, SOR, GS, JOR, Jacobi };

const char* to_string(MethodFamily f);
MethodFamily family_from_string(const std::string& s);

// AOR: alpha = 2r, beta = 2(w - r), needs 0 <= r <= w, w > 0. SOR: (2w, 0).
// GS: (2, 0). JOR: (0, 2w). Jacobi: (0, 2). TOR has no (r, w) form and raises
// ParameterError directing callers to explicit alpha/beta.
TorParameters preset_parameters(MethodFamily family, std::optional<double> r = std::nullopt,
                                std::optional<double> w = std::nullopt);

struct SolverConfig {
    TorParameters params = TorParameters::uniform(2.0, 0.0);
    InnerSchedule schedule = InnerSchedule::constant(1);
    double tol_residual = 1e-10;
    long max_outer = 10000;
    std::optional<int> worker_count;  // defaults to p
    bool record_history = true;
    std::optional<double> parameter_bound;  // echoed into reports when known
};

struct IterationReport {
    bool converged = false;
    long outer_iterations = 0;
    double final_residual = 0.0;
    DenseVector solution;  // the last iterate, converged or not
    std::vector<double> residual_history;              // includes the initial residual
    std::optional<std::vector<double>> error_history;  // ||x_i - x*||_inf when x* is known
    double wall_seconds = 0.0;
    std::optional<double> parameter_bound_used;
    std::string diagnostic;  // set when the iteration broke down
};

// Iteration state: current iterate, outer index, and the per-splitting
// (M_l, N_l) cache, rebuilt whenever the parameters change.
class SolverState {
public:
    SolverState(const WeaklyNonlinearProblem& problem, const MultiSplitting& ms,
                const TorParameters& params, DenseVector x0);

    const WeaklyNonlinearProblem& problem() const { return *problem_; }
    const MultiSplitting& splitting() const { return *ms_; }
    const DenseVector& x() const { return x_; }
    long outer_index() const { return outer_; }

    void set_iterate(DenseVector x);
    void ensure_parameters(const TorParameters& params);
    const SparseMatrix& M(index_t l) const { return cache_[static_cast<size_t>(l)].first; }
    const SparseMatrix& N(index_t l) const { return cache_[static_cast<size_t>(l)].second; }

private:
    friend const DenseVector& outer_step(SolverState&, const SolverConfig&);
    const WeaklyNonlinearProblem* problem_;
    const MultiSplitting* ms_;
    TorParameters params_;
    std::vector<std::pair<SparseMatrix, SparseMatrix>> cache_;
    DenseVector x_;
    long outer_ = 0;
};

// One inner relaxation step z' = M^-1 (N z + c).
DenseVector inner_sweep(const SparseMatrix& m, const SparseMatrix& n, const DenseVector& z,
                        const DenseVector& c);

// s inner sweeps from x with fixed right-hand side rhs = C_l x + G(x).
DenseVector local_iterate(index_t l, const DenseVector& x, const DenseVector& rhs, long s,
                          const SolverState& state);

// One outer iteration: evaluates G once, runs every splitting's local iterate
// (in parallel), and combines in fixed splitting order, so the result is
// bit-identical for any worker count. Non-finite iterates raise DivergenceError.
const DenseVector& outer_step(SolverState& state, const SolverConfig& config);

// ||Ax - G(x)||_inf / (1 + ||G(x)||_inf).
double residual(const WeaklyNonlinearProblem& problem, const DenseVector& x);

// Never throws on plain non-convergence; divergence is reported via the
// diagnostic field with converged = false.
IterationReport solve(const WeaklyNonlinearProblem& problem, const MultiSplitting& ms,
                      const SolverConfig& config, const DenseVector& x0);

}  // namespace mstor
