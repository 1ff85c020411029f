// Experiment orchestration: hypothesis validation, single runs, parameter
// sweeps, the direct-solve reference oracle, and JSON/CSV reports.
#pragma once

#include <filesystem>

#include <json.hpp>

#include "mstor/hypotheses.hpp"
#include "mstor/solver.hpp"

namespace mstor {

struct ExperimentSpec {
    std::string problem_source;  // path or generator description, echoed into reports

    index_t p = 1;
    SplittingStrategy strategy = SplittingStrategy::BlockJacobi;
    index_t overlap = 0;
    LowerPartition partition = LowerPartition::all_to_v();

    // Parameter resolution order: per-splitting arrays, then a family preset,
    // then uniform alpha/beta. Exactly one form must be given.
    std::optional<std::vector<double>> alphas;
    std::optional<std::vector<double>> betas;
    std::optional<MethodFamily> family;
    std::optional<double> r;
    std::optional<double> w;
    std::optional<double> alpha;
    std::optional<double> beta;

    std::vector<long> inner = {1};  // one entry = constant, p entries = per splitting
    double tol = 1e-10;
    long max_outer = 10000;
    std::optional<int> workers;
    std::optional<DenseVector> x0;  // zeros by default

    // Sweep grid over t = alpha+beta and q = alpha/(alpha+beta); each point runs
    // with uniform parameters (q*t, (1-q)*t). Ratios default to {0.5}.
    std::optional<std::vector<double>> sweep_sums;
    std::optional<std::vector<double>> sweep_ratios;

    unsigned long seed = 0;
    bool with_oracle = false;
    double oracle_tol = 1e-12;
    long oracle_max_iters = 10000;
};

struct RunResult {
    TorParameters params = TorParameters::uniform(2.0, 0.0);
    long s = 1;  // smallest scheduled sweep count
    IterationReport report;
    std::optional<double> oracle_delta;
};

struct ExperimentRecord {
    ExperimentSpec spec;
    std::string problem_name;
    index_t dim = 0;
    HypothesisReport hypotheses;  // the regime that was selected (or attempted)
    bool validated = false;
    double parameter_bound = 0.0;  // 0 when no regime validated
    std::vector<RunResult> runs;
    std::vector<std::string> warnings;
};

// Picard iteration x' = A^-1 G(x) from x = 0 with a single dense factorization;
// the independent reference the solver is checked against. Appends a warning
// when the contraction estimate rho(|A^-1| P) is not below 1 (n <= 2000 only).
DenseVector picard_oracle(const WeaklyNonlinearProblem& problem, double tol = 1e-12,
                          long max_iters = 10000, std::vector<std::string>* warnings = nullptr);

// Builds the multi-splitting, validates hypotheses (advisory: the run proceeds
// either way), resolves parameters, and solves every grid point in grid order.
ExperimentRecord run_experiment(const WeaklyNonlinearProblem& problem, const ExperimentSpec& spec);

nlohmann::json record_to_json(const ExperimentRecord& record);
void write_json(const ExperimentRecord& record, const std::filesystem::path& path);
// Columns: alpha,beta,s,p,outer_iterations,final_residual,converged,wall_ms,oracle_delta.
void write_csv(const ExperimentRecord& record, const std::filesystem::path& path);

}  // namespace mstor
