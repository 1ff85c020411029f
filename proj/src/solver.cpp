#include "mstor/solver.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "mstor/errors.hpp"

namespace mstor {

InnerSchedule InnerSchedule::constant(long s) {
    if (s < 1) throw ParameterError("inner sweep count must be >= 1, got " + std::to_string(s));
    InnerSchedule sched;
    sched.values_ = {s};
    return sched;
}

InnerSchedule InnerSchedule::per_splitting(std::vector<long> s) {
    if (s.empty()) throw ParameterError("per-splitting schedule needs at least one entry");
    for (size_t l = 0; l < s.size(); ++l) {
        if (s[l] < 1) {
            throw ParameterError("inner sweep count for splitting " + std::to_string(l) +
                                 " must be >= 1, got " + std::to_string(s[l]));
        }
    }
    InnerSchedule sched;
    sched.values_ = std::move(s);
    return sched;
}

InnerSchedule InnerSchedule::function(std::function<long(index_t, long)> f) {
    if (!f) throw ParameterError("schedule callback must be callable");
    InnerSchedule sched;
    sched.fn_ = std::move(f);
    return sched;
}

long InnerSchedule::at(index_t l, long outer, index_t p) const {
    long s;
    if (fn_) {
        s = fn_(l, outer);
    } else if (values_.size() == 1) {
        s = values_[0];
    } else {
        if (static_cast<index_t>(values_.size()) != p) {
            throw ParameterError("schedule has " + std::to_string(values_.size()) +
                                 " entries but the multi-splitting has " + std::to_string(p));
        }
        s = values_[static_cast<size_t>(l)];
    }
    if (s < 1) {
        throw ParameterError("schedule produced " + std::to_string(s) + " sweeps for splitting " +
                             std::to_string(l) + " at outer step " + std::to_string(outer) +
                             "; need >= 1");
    }
    return s;
}

std::optional<long> InnerSchedule::min_constant() const {
    if (fn_) return std::nullopt;
    return *std::min_element(values_.begin(), values_.end());
}

const char* to_string(MethodFamily f) {
    switch (f) {
        case MethodFamily::TOR: return "tor";
        case MethodFamily::AOR: return "aor";
        case MethodFamily::SOR: return "sor";
        case MethodFamily::GS: return "gs";
        case MethodFamily::JOR: return "jor";
        case MethodFamily::Jacobi: return "jacobi";
    }
    return "?";
}

MethodFamily family_from_string(const std::string& s) {
    if (s == "tor") return MethodFamily::TOR;
    if (s == "aor") return MethodFamily::AOR;
    if (s == "sor") return MethodFamily::SOR;
    if (s == "gs") return MethodFamily::GS;
    if (s == "jor") return MethodFamily::JOR;
    if (s == "jacobi") return MethodFamily::Jacobi;
    throw ParameterError("unknown method family '" + s + "'");
}

TorParameters preset_parameters(MethodFamily family, std::optional<double> r,
                                std::optional<double> w) {
    auto need_w = [&](const char* name) {
        if (!w) throw ParameterError(std::string(name) + " preset needs the relaxation factor w");
        if (!(*w > 0.0)) {
            throw ParameterError(std::string(name) + " preset needs w > 0, got " +
                                 std::to_string(*w));
        }
    };
    switch (family) {
        case MethodFamily::TOR:
            throw ParameterError(
                "the two-parameter method has no (r, w) form; pass alpha and beta directly");
        case MethodFamily::AOR: {
            need_w("aor");
            if (!r) throw ParameterError("aor preset needs the acceleration factor r");
            if (!(*r >= 0.0) || *r > *w) {
                throw ParameterError("aor preset needs 0 <= r <= w, got r = " +
                                     std::to_string(*r) + ", w = " + std::to_string(*w));
            }
            return TorParameters::uniform(2.0 * *r, 2.0 * (*w - *r));
        }
        case MethodFamily::SOR:
            need_w("sor");
            if (r && *r != *w) {
                throw ParameterError("sor fixes r = w; drop r or pass aor");
            }
            return TorParameters::uniform(2.0 * *w, 0.0);
        case MethodFamily::GS:
            if (w && *w != 1.0) throw ParameterError("gs fixes w = 1; pass sor to vary it");
            return TorParameters::uniform(2.0, 0.0);
        case MethodFamily::JOR:
            need_w("jor");
            return TorParameters::uniform(0.0, 2.0 * *w);
        case MethodFamily::Jacobi:
            if (w && *w != 1.0) throw ParameterError("jacobi fixes w = 1; pass jor to vary it");
            return TorParameters::uniform(0.0, 2.0);
    }
    throw ParameterError("unknown method family");
}

SolverState::SolverState(const WeaklyNonlinearProblem& problem, const MultiSplitting& ms,
                         const TorParameters& params, DenseVector x0)
    : problem_(&problem), ms_(&ms), params_(params) {
    ms.validate(problem.A);
    if (static_cast<index_t>(x0.size()) != problem.dim()) {
        throw DimensionError("initial iterate has length " + std::to_string(x0.size()) +
                             ", expected " + std::to_string(problem.dim()));
    }
    require_finite(x0, "initial iterate");
    x_ = std::move(x0);
    cache_.reserve(static_cast<size_t>(ms.p));
    for (index_t l = 0; l < ms.p; ++l) {
        cache_.push_back(tor_matrices(ms.splits[static_cast<size_t>(l)], params_.alpha_for(l),
                                      params_.beta_for(l)));
    }
}

void SolverState::set_iterate(DenseVector x) {
    if (static_cast<index_t>(x.size()) != problem_->dim()) {
        throw DimensionError("iterate has length " + std::to_string(x.size()) + ", expected " +
                             std::to_string(problem_->dim()));
    }
    require_finite(x, "iterate");
    x_ = std::move(x);
}

void SolverState::ensure_parameters(const TorParameters& params) {
    if (params == params_) return;
    std::vector<std::pair<SparseMatrix, SparseMatrix>> fresh;
    fresh.reserve(cache_.size());
    for (index_t l = 0; l < ms_->p; ++l) {
        fresh.push_back(tor_matrices(ms_->splits[static_cast<size_t>(l)], params.alpha_for(l),
                                     params.beta_for(l)));
    }
    cache_ = std::move(fresh);
    params_ = params;
}

DenseVector inner_sweep(const SparseMatrix& m, const SparseMatrix& n, const DenseVector& z,
                        const DenseVector& c) {
    DenseVector rhs = n.multiply(z);
    for (size_t i = 0; i < rhs.size(); ++i) rhs[i] += c[i];
    lower_triangular_solve_inplace(m, rhs);
    return rhs;
}

DenseVector local_iterate(index_t l, const DenseVector& x, const DenseVector& rhs, long s,
                          const SolverState& state) {
    const SparseMatrix& m = state.M(l);
    const SparseMatrix& n = state.N(l);
    DenseVector z = x;
    DenseVector work(z.size());
    for (long k = 0; k < s; ++k) {
        n.multiply_into(z, work);
        for (size_t i = 0; i < work.size(); ++i) work[i] += rhs[i];
        lower_triangular_solve_inplace(m, work);
        z.swap(work);
    }
    return z;
}

const DenseVector& outer_step(SolverState& state, const SolverConfig& config) {
    const MultiSplitting& ms = state.splitting();
    const WeaklyNonlinearProblem& problem = state.problem();
    const index_t n = problem.dim();
    const index_t p = ms.p;
    state.ensure_parameters(config.params);

    DenseVector g = problem.G(state.x());
    // Resolve the whole schedule on the host thread; callbacks never run on workers.
    std::vector<long> sweeps(static_cast<size_t>(p));
    for (index_t l = 0; l < p; ++l) {
        sweeps[static_cast<size_t>(l)] = config.schedule.at(l, state.outer_, p);
    }

    std::vector<DenseVector> locals(static_cast<size_t>(p));
    std::vector<std::exception_ptr> failures(static_cast<size_t>(p));
    auto run_l = [&](index_t l) {
        try {
            const SparseMatrix& c = ms.C[static_cast<size_t>(l)];
            DenseVector rhs = c.multiply(state.x());
            for (index_t i = 0; i < n; ++i) rhs[static_cast<size_t>(i)] += g[static_cast<size_t>(i)];
            locals[static_cast<size_t>(l)] =
                local_iterate(l, state.x(), rhs, sweeps[static_cast<size_t>(l)], state);
        } catch (...) {
            failures[static_cast<size_t>(l)] = std::current_exception();
        }
    };

    int workers = config.worker_count.value_or(static_cast<int>(p));
    if (workers < 1) throw ParameterError("worker count must be >= 1");
    workers = static_cast<int>(std::min<index_t>(workers, p));
    if (workers == 1) {
        for (index_t l = 0; l < p; ++l) run_l(l);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back([&, t] {
                for (index_t l = t; l < p; l += workers) run_l(l);
            });
        }
        for (auto& th : pool) th.join();
    }
    for (index_t l = 0; l < p; ++l) {
        if (failures[static_cast<size_t>(l)]) std::rethrow_exception(failures[static_cast<size_t>(l)]);
    }

    // Fixed combination order: l = 0, 1, ..., p-1 regardless of worker count.
    DenseVector next(static_cast<size_t>(n), 0.0);
    for (index_t l = 0; l < p; ++l) {
        const DenseVector& e = ms.E[static_cast<size_t>(l)];
        const DenseVector& y = locals[static_cast<size_t>(l)];
        for (size_t i = 0; i < static_cast<size_t>(n); ++i) {
            if (e[i] != 0.0) next[i] += e[i] * y[i];
        }
    }
    for (index_t i = 0; i < n; ++i) {
        if (!std::isfinite(next[static_cast<size_t>(i)])) {
            throw DivergenceError("iterate became non-finite at outer step " +
                                      std::to_string(state.outer_ + 1) + ", component " +
                                      std::to_string(i),
                                  state.outer_ + 1, i);
        }
    }
    state.x_ = std::move(next);
    state.outer_ += 1;
    return state.x();
}

double residual(const WeaklyNonlinearProblem& problem, const DenseVector& x) {
    DenseVector ax = problem.A.multiply(x);
    DenseVector g = problem.G(x);
    double num = 0.0;
    for (size_t i = 0; i < ax.size(); ++i) num = std::max(num, std::abs(ax[i] - g[i]));
    return num / (1.0 + norm_inf(g));
}

IterationReport solve(const WeaklyNonlinearProblem& problem, const MultiSplitting& ms,
                      const SolverConfig& config, const DenseVector& x0) {
    if (config.tol_residual <= 0.0 || !std::isfinite(config.tol_residual)) {
        throw ParameterError("residual tolerance must be positive and finite");
    }
    if (config.max_outer < 1) throw ParameterError("max outer iterations must be >= 1");

    const auto t0 = std::chrono::steady_clock::now();
    SolverState state(problem, ms, config.params, x0);

    IterationReport report;
    report.parameter_bound_used = config.parameter_bound;
    const bool track_error = problem.known_solution.has_value() && config.record_history;
    if (track_error) report.error_history.emplace();

    auto record = [&](double res) {
        if (config.record_history) report.residual_history.push_back(res);
        if (track_error) {
            report.error_history->push_back(max_abs_diff(state.x(), *problem.known_solution));
        }
    };

    double res = residual(problem, state.x());
    record(res);
    report.final_residual = res;

    try {
        while (res > config.tol_residual && state.outer_index() < config.max_outer) {
            outer_step(state, config);
            res = residual(problem, state.x());
            record(res);
            report.final_residual = res;
        }
        report.converged = res <= config.tol_residual;
        if (!report.converged) {
            report.diagnostic = "outer iteration limit (" + std::to_string(config.max_outer) +
                                ") reached with residual " + std::to_string(res);
        }
    } catch (const DivergenceError& e) {
        report.converged = false;
        report.diagnostic = e.what();
    }
    report.outer_iterations = state.outer_index();
    report.solution = state.x();

    const auto t1 = std::chrono::steady_clock::now();
    report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    return report;
}

}  // namespace mstor
