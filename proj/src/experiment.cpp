#include "mstor/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mstor/classify.hpp"

#include "mstor/dense_solve.hpp"
#include "mstor/errors.hpp"
#include "mstor/spectral.hpp"

namespace mstor {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// rho(|A^-1| P) by power iteration on x -> |A^-1| (P x).
double picard_contraction_estimate(const SparseMatrix& a, const SparseMatrix& p) {
    DenseLU lu(a);
    const auto inv = lu.inverse();
    const index_t n = a.rows();
    std::vector<double> abs_inv(inv.size());
    for (size_t k = 0; k < inv.size(); ++k) abs_inv[k] = std::abs(inv[k]);
    auto op = [&](const DenseVector& x, DenseVector& y) {
        DenseVector px = p.multiply(x);
        for (index_t i = 0; i < n; ++i) {
            double acc = 0.0;
            const double* row = abs_inv.data() + static_cast<size_t>(i * n);
            for (index_t j = 0; j < n; ++j) acc += row[j] * px[static_cast<size_t>(j)];
            y[static_cast<size_t>(i)] = acc;
        }
    };
    double hint = 0.0;
    for (index_t i = 0; i < n; ++i) {
        double s = 0.0;
        const double* row = abs_inv.data() + static_cast<size_t>(i * n);
        for (index_t j = 0; j < n; ++j) s += row[j];
        hint = std::max(hint, s);
    }
    return spectral_radius_nonneg_op(n, op, hint * p.norm_inf());
}

TorParameters resolve_parameters(const ExperimentSpec& spec, index_t p) {
    if (spec.alphas || spec.betas) {
        if (!spec.alphas || !spec.betas) {
            throw ParameterError("per-splitting parameters need both alpha and beta arrays");
        }
        if (static_cast<index_t>(spec.alphas->size()) != p ||
            static_cast<index_t>(spec.betas->size()) != p) {
            throw ParameterError("per-splitting parameter arrays must have length p = " +
                                 std::to_string(p));
        }
        return TorParameters::per_splitting(*spec.alphas, *spec.betas);
    }
    if (spec.family) return preset_parameters(*spec.family, spec.r, spec.w);
    if (spec.alpha || spec.beta) {
        if (!spec.alpha || !spec.beta) {
            throw ParameterError("uniform parameters need both alpha and beta");
        }
        return TorParameters::uniform(*spec.alpha, *spec.beta);
    }
    throw ParameterError(
        "no relaxation parameters given; pass alpha/beta, per-splitting arrays, or a family");
}

json spec_to_json(const ExperimentSpec& spec) {
    json j;
    j["problem_source"] = spec.problem_source;
    j["p"] = spec.p;
    switch (spec.strategy) {
        case SplittingStrategy::BlockJacobi: j["splitting"] = "block0"; break;
        case SplittingStrategy::BlockOverlap: j["splitting"] = "overlap:" + std::to_string(spec.overlap); break;
        case SplittingStrategy::GlobalCopies: j["splitting"] = "global"; break;
    }
    switch (spec.partition.kind()) {
        case LowerPartitionKind::AllToV: j["lower_partition"] = "all"; break;
        case LowerPartitionKind::AlternateRows: j["lower_partition"] = "alt-rows"; break;
        case LowerPartitionKind::ColumnHalves: j["lower_partition"] = "col-halves"; break;
        case LowerPartitionKind::CustomMask: j["lower_partition"] = "mask"; break;
    }
    if (spec.alphas) j["alphas"] = *spec.alphas;
    if (spec.betas) j["betas"] = *spec.betas;
    if (spec.family) j["family"] = to_string(*spec.family);
    if (spec.r) j["r"] = *spec.r;
    if (spec.w) j["w"] = *spec.w;
    if (spec.alpha) j["alpha"] = *spec.alpha;
    if (spec.beta) j["beta"] = *spec.beta;
    j["inner"] = spec.inner;
    j["tol"] = spec.tol;
    j["max_outer"] = spec.max_outer;
    if (spec.workers) j["workers"] = *spec.workers;
    if (spec.sweep_sums) j["sweep_sums"] = *spec.sweep_sums;
    if (spec.sweep_ratios) j["sweep_ratios"] = *spec.sweep_ratios;
    j["seed"] = spec.seed;
    j["with_oracle"] = spec.with_oracle;
    return j;
}

json hypotheses_to_json(const HypothesisReport& rep) {
    json j;
    j["regime"] = to_string(rep.regime);
    j["all_passed"] = rep.all_passed();
    j["rho"] = rep.rho_value;
    j["parameter_bound"] = rep.parameter_upper_bound;
    j["checks"] = json::array();
    for (const auto& c : rep.checks) {
        j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    j["warnings"] = rep.warnings;
    return j;
}

}  // namespace

DenseVector picard_oracle(const WeaklyNonlinearProblem& problem, double tol, long max_iters,
                          std::vector<std::string>* warnings) {
    if (tol <= 0.0 || !std::isfinite(tol)) throw ParameterError("oracle tolerance must be positive");
    if (max_iters < 1) throw ParameterError("oracle iteration cap must be >= 1");

    const index_t n = problem.dim();
    if (warnings && n <= DenseLU::kMaxDim) {
        const double rho = picard_contraction_estimate(problem.A, problem.G.bound());
        if (!(rho < 1.0)) {
            warnings->push_back("contraction estimate rho(|A^-1| P) = " + fmt(rho) +
                                " is not below 1; the fixed point may not be unique and the "
                                "reference iteration may not converge");
        }
    }

    DenseLU lu(problem.A);
    DenseVector x(static_cast<size_t>(n), 0.0);
    for (long k = 0; k < max_iters; ++k) {
        DenseVector next = lu.solve(problem.G(x));
        const double step = max_abs_diff(next, x);
        x = std::move(next);
        if (step <= tol) return x;
    }
    throw OracleError("reference iteration did not reach " + fmt(tol) + " within " +
                      std::to_string(max_iters) + " steps");
}

ExperimentRecord run_experiment(const WeaklyNonlinearProblem& problem,
                                const ExperimentSpec& spec) {
    ExperimentRecord record;
    record.spec = spec;
    record.problem_name = problem.name;
    record.dim = problem.dim();

    MultiSplitting ms =
        build_multisplitting(problem.A, spec.p, spec.strategy, spec.partition, spec.overlap);

    // Advisory validation: prefer the H-matrix regime, fall back to the
    // monotone one; the run proceeds either way.
    const SparseMatrix& p_bound = problem.G.bound();
    HypothesisReport h_rep = validate_h_hypotheses(problem.A, ms, p_bound);
    if (h_rep.all_passed()) {
        record.hypotheses = std::move(h_rep);
        record.validated = true;
    } else {
        HypothesisReport m_rep = validate_monotone_hypotheses(problem.A, ms, p_bound);
        if (m_rep.all_passed()) {
            record.hypotheses = std::move(m_rep);
            record.validated = true;
        } else {
            record.hypotheses = std::move(h_rep);  // report the preferred regime's failures
            record.validated = false;
            record.warnings.push_back(
                "no convergence regime validated; the run proceeds without a guarantee");
        }
    }
    record.parameter_bound = record.validated ? record.hypotheses.parameter_upper_bound : 0.0;

    InnerSchedule schedule = spec.inner.size() == 1 ? InnerSchedule::constant(spec.inner[0])
                                                    : InnerSchedule::per_splitting(spec.inner);
    const long min_s = *schedule.min_constant();
    if (record.validated && min_s == 1) {
        record.warnings.push_back(
            "the convergence guarantees assume more than one inner sweep per outer step; the "
            "schedule allows s = 1");
    }

    DenseVector x0 = spec.x0.value_or(DenseVector(static_cast<size_t>(problem.dim()), 0.0));

    std::optional<DenseVector> oracle;
    if (spec.with_oracle) {
        oracle = picard_oracle(problem, spec.oracle_tol, spec.oracle_max_iters, &record.warnings);
    }

    std::vector<TorParameters> grid;
    if (spec.sweep_sums) {
        if (spec.sweep_sums->empty()) throw ParameterError("sweep grid must be nonempty");
        std::vector<double> ratios = spec.sweep_ratios.value_or(std::vector<double>{0.5});
        if (ratios.empty()) throw ParameterError("sweep ratio list must be nonempty");
        for (double t : *spec.sweep_sums) {
            for (double q : ratios) {
                if (!(q >= 0.0 && q <= 1.0)) {
                    throw ParameterError("sweep ratio must lie in [0, 1], got " + fmt(q));
                }
                grid.push_back(TorParameters::uniform(q * t, (1.0 - q) * t));
            }
        }
    } else {
        if (spec.sweep_ratios) {
            throw ParameterError("sweep ratios need a sweep over alpha+beta as well");
        }
        grid.push_back(resolve_parameters(spec, ms.p));
    }

    SolverConfig config;
    config.schedule = schedule;
    config.tol_residual = spec.tol;
    config.max_outer = spec.max_outer;
    config.worker_count = spec.workers;
    config.record_history = true;
    if (record.validated) config.parameter_bound = record.parameter_bound;

    record.runs.reserve(grid.size());
    for (const auto& params : grid) {
        config.params = params;
        RunResult run;
        run.params = params;
        run.s = min_s;
        run.report = solve(problem, ms, config, x0);
        if (oracle) run.oracle_delta = max_abs_diff(run.report.solution, *oracle);
        record.runs.push_back(std::move(run));
    }
    return record;
}

json record_to_json(const ExperimentRecord& record) {
    json j;
    j["schema_version"] = 1;
    j["spec"] = spec_to_json(record.spec);
    j["problem"] = {{"name", record.problem_name}, {"n", record.dim}};
    j["hypotheses"] = hypotheses_to_json(record.hypotheses);
    j["validated"] = record.validated;
    j["parameter_bound"] = record.parameter_bound;
    j["warnings"] = record.warnings;
    j["runs"] = json::array();
    for (const auto& run : record.runs) {
        json r;
        if (run.params.mode() == TorParameters::Mode::Uniform) {
            r["alpha"] = run.params.alpha_for(0);
            r["beta"] = run.params.beta_for(0);
        } else {
            json alphas = json::array(), betas = json::array();
            for (size_t l = 0; l < run.params.size(); ++l) {
                alphas.push_back(run.params.alpha_for(l));
                betas.push_back(run.params.beta_for(l));
            }
            r["alphas"] = alphas;
            r["betas"] = betas;
            r["alpha"] = run.params.alpha_for(0);
            r["beta"] = run.params.beta_for(0);
        }
        r["s"] = run.s;
        r["outer_iterations"] = run.report.outer_iterations;
        r["final_residual"] = run.report.final_residual;
        r["converged"] = run.report.converged;
        r["wall_ms"] = run.report.wall_seconds * 1e3;
        r["residual_history"] = run.report.residual_history;
        if (run.report.error_history) r["error_history"] = *run.report.error_history;
        if (run.oracle_delta) r["oracle_delta"] = *run.oracle_delta;
        if (!run.report.diagnostic.empty()) r["diagnostic"] = run.report.diagnostic;
        j["runs"].push_back(std::move(r));
    }
    return j;
}

void write_json(const ExperimentRecord& record, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError(path.string() + ": cannot open for writing");
    out << record_to_json(record).dump(2) << "\n";
    if (!out) throw ParseError(path.string() + ": write failed");
}

void write_csv(const ExperimentRecord& record, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError(path.string() + ": cannot open for writing");
    out << "alpha,beta,s,p,outer_iterations,final_residual,converged,wall_ms,oracle_delta\n";
    for (const auto& run : record.runs) {
        out << fmt(run.params.alpha_for(0)) << ',' << fmt(run.params.beta_for(0)) << ',' << run.s
            << ',' << record.spec.p << ',' << run.report.outer_iterations << ','
            << fmt(run.report.final_residual) << ',' << (run.report.converged ? 1 : 0) << ','
            << fmt(run.report.wall_seconds * 1e3) << ',';
        if (run.oracle_delta) out << fmt(*run.oracle_delta);
        out << '\n';
    }
    if (!out) throw ParseError(path.string() + ": write failed");
}

}  // namespace mstor
