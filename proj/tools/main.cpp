// mstor: solve, sweep, generate, validate, and oracle subcommands over
// weakly nonlinear systems Ax = G(x).
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mstor/experiment.hpp"
#include "mstor/matrix_market.hpp"
#include "mstor/problem_io.hpp"

namespace {

using namespace mstor;

constexpr int kExitConverged = 0;
constexpr int kExitNotConverged = 2;
constexpr int kExitValidationFailed = 3;
constexpr int kExitInputError = 4;

std::vector<double> parse_doubles(const std::string& csv, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ParameterError(flag + ": cannot parse '" + item + "' as a real number");
        }
    }
    if (out.empty()) throw ParameterError(flag + ": empty list");
    return out;
}

std::vector<long> parse_longs(const std::string& csv, const std::string& flag) {
    std::vector<long> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            long v = std::stol(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ParameterError(flag + ": cannot parse '" + item + "' as an integer");
        }
    }
    if (out.empty()) throw ParameterError(flag + ": empty list");
    return out;
}

// "sin", "arctan", "expdecay", or "const:<c>".
std::pair<Nonlinearity, double> parse_nonlinearity(const std::string& s) {
    if (s.rfind("const:", 0) == 0) {
        const std::string num = s.substr(6);
        try {
            size_t used = 0;
            double c = std::stod(num, &used);
            if (used != num.size()) throw std::invalid_argument(num);
            return {Nonlinearity::Constant, c};
        } catch (const std::exception&) {
            throw ParameterError("--nonlinearity: cannot parse '" + num + "' in const:<c>");
        }
    }
    return {nonlinearity_from_string(s), 0.0};
}

LowerPartition parse_partition(const std::string& s) {
    if (s == "all") return LowerPartition::all_to_v();
    if (s == "alt-rows") return LowerPartition::alternate_rows();
    if (s == "col-halves") return LowerPartition::column_halves();
    if (s.rfind("mask:", 0) == 0) {
        const std::string path = s.substr(5);
        std::ifstream in(path);
        if (!in) throw ParseError(path + ": cannot open mask file");
        std::set<std::pair<index_t, index_t>> mask;
        std::string line;
        long line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::istringstream ls(line);
            index_t i, j;
            if (!(ls >> i)) continue;  // blank line
            if (!(ls >> j)) {
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": expected 'row col' (1-based)");
            }
            if (i < 1 || j < 1) {
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": mask indices are 1-based");
            }
            mask.insert({i - 1, j - 1});
        }
        return LowerPartition::custom(std::move(mask));
    }
    throw ParameterError("--lower-partition: unknown value '" + s +
                         "' (use all, alt-rows, col-halves, or mask:<file>)");
}

void parse_splitting(const std::string& s, SplittingStrategy& strategy, index_t& overlap) {
    if (s == "block0") {
        strategy = SplittingStrategy::BlockJacobi;
        overlap = 0;
        return;
    }
    if (s == "global") {
        strategy = SplittingStrategy::GlobalCopies;
        overlap = 0;
        return;
    }
    if (s.rfind("overlap:", 0) == 0) {
        const std::string num = s.substr(8);
        try {
            size_t used = 0;
            long k = std::stol(num, &used);
            if (used != num.size() || k < 0) throw std::invalid_argument(num);
            strategy = SplittingStrategy::BlockOverlap;
            overlap = k;
            return;
        } catch (const std::exception&) {
            throw ParameterError("--splitting: cannot parse '" + num + "' in overlap:<k>");
        }
    }
    throw ParameterError("--splitting: unknown value '" + s +
                         "' (use block0, overlap:<k>, or global)");
}

// Flags shared by every subcommand that needs a problem.
struct ProblemFlags {
    std::string problem_dir;
    std::string matrix_path;
    long grid_m = 0;
    std::string nonlinearity;
    double coupling = 1.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--problem", problem_dir, "problem directory (A.mtx + problem.json)");
        cmd->add_option("--matrix", matrix_path, "system matrix in Matrix Market format");
        cmd->add_option("--grid", grid_m, "generate an m x m grid Laplacian problem");
        cmd->add_option("--nonlinearity", nonlinearity,
                        "sin|arctan|expdecay|const:<c> (with --matrix or --grid)");
        cmd->add_option("--coupling", coupling, "nonlinearity coupling strength")->capture_default_str();
    }

    WeaklyNonlinearProblem build(std::string& source) const {
        const int given =
            (!problem_dir.empty() ? 1 : 0) + (!matrix_path.empty() ? 1 : 0) + (grid_m > 0 ? 1 : 0);
        if (given != 1) {
            throw ParameterError("give exactly one of --problem, --matrix, or --grid");
        }
        if (!problem_dir.empty()) {
            source = problem_dir;
            return load_problem(problem_dir);
        }
        if (nonlinearity.empty()) {
            throw ParameterError(std::string(grid_m > 0 ? "--grid" : "--matrix") +
                                 " needs --nonlinearity");
        }
        auto [kind, c] = parse_nonlinearity(nonlinearity);
        if (grid_m > 0) {
            source = "grid:" + std::to_string(grid_m) + ":" + nonlinearity + ":c=" +
                     std::to_string(coupling);
            return generate_grid_problem(grid_m, kind, coupling, c);
        }
        SparseMatrix a = read_matrix_market(std::filesystem::path(matrix_path));
        if (!a.square()) {
            throw DimensionError(matrix_path + ": system matrix must be square");
        }
        source = matrix_path + ":" + nonlinearity + ":c=" + std::to_string(coupling);
        BoundedMap g = make_componentwise_map(kind, a.rows(), coupling, c);
        std::string name = std::filesystem::path(matrix_path).stem().string();
        WeaklyNonlinearProblem problem(std::move(a), std::move(g), name, std::nullopt, false);
        NonlinearityRecipe recipe;
        recipe.kind = kind;
        recipe.coupling = coupling;
        recipe.constant_value = c;
        problem.recipe = recipe;
        return problem;
    }
};

struct MethodFlags {
    std::string family;
    double r = 0.0, w = 0.0;
    bool has_r = false, has_w = false;
    double alpha = 0.0, beta = 0.0;
    bool has_alpha = false, has_beta = false;
    std::string alphas_csv, betas_csv;
    long p = 1;
    std::string splitting = "block0";
    std::string lower_partition = "all";
    std::string inner = "1";
    double tol = 1e-10;
    long max_outer = 10000;
    long workers = 0;
    unsigned long seed = 0;
    double x0_fill = 0.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--family", family, "tor|aor|sor|gs|jor|jacobi");
        cmd->add_option("--r", r, "acceleration factor (aor)")->each([this](const std::string&) {
            has_r = true;
        });
        cmd->add_option("--w", w, "relaxation factor (aor/sor/jor)")
            ->each([this](const std::string&) { has_w = true; });
        cmd->add_option("--alpha", alpha, "first relaxation parameter")
            ->each([this](const std::string&) { has_alpha = true; });
        cmd->add_option("--beta", beta, "second relaxation parameter")
            ->each([this](const std::string&) { has_beta = true; });
        cmd->add_option("--alphas", alphas_csv, "per-splitting alpha list (csv)");
        cmd->add_option("--betas", betas_csv, "per-splitting beta list (csv)");
        cmd->add_option("--splittings", p, "number of splittings p")->capture_default_str();
        cmd->add_option("--splitting", splitting, "block0|overlap:<k>|global")->capture_default_str();
        cmd->add_option("--lower-partition", lower_partition,
                        "all|alt-rows|col-halves|mask:<file>")->capture_default_str();
        cmd->add_option("--inner", inner, "inner sweeps: one count or p counts (csv)")->capture_default_str();
        cmd->add_option("--tol", tol, "residual tolerance")->capture_default_str();
        cmd->add_option("--max-outer", max_outer, "outer iteration cap")->capture_default_str();
        cmd->add_option("--workers", workers, "worker threads (default: p)");
        cmd->add_option("--seed", seed, "seed echoed into reports")->capture_default_str();
        cmd->add_option("--x0", x0_fill, "initial iterate fill value")->capture_default_str();
    }

    void fill(ExperimentSpec& spec) const {
        spec.p = p;
        parse_splitting(splitting, spec.strategy, spec.overlap);
        spec.partition = parse_partition(lower_partition);
        if (!alphas_csv.empty()) spec.alphas = parse_doubles(alphas_csv, "--alphas");
        if (!betas_csv.empty()) spec.betas = parse_doubles(betas_csv, "--betas");
        if (!family.empty()) spec.family = family_from_string(family);
        if (has_r) spec.r = r;
        if (has_w) spec.w = w;
        if (has_alpha) spec.alpha = alpha;
        if (has_beta) spec.beta = beta;
        spec.inner = parse_longs(inner, "--inner");
        spec.tol = tol;
        spec.max_outer = max_outer;
        if (workers > 0) spec.workers = static_cast<int>(workers);
        spec.seed = seed;
    }
};

void print_record(const ExperimentRecord& record) {
    std::printf("problem %s  n=%lld  p=%lld\n", record.problem_name.c_str(),
                static_cast<long long>(record.dim), static_cast<long long>(record.spec.p));
    if (record.validated) {
        std::printf("regime %s validated, rho=%.6g, parameter bound %.6g\n",
                    to_string(record.hypotheses.regime), record.hypotheses.rho_value,
                    record.parameter_bound);
    } else {
        std::printf("no convergence regime validated (ran anyway)\n");
    }
    for (const auto& warning : record.warnings) {
        std::printf("warning: %s\n", warning.c_str());
    }
    for (const auto& run : record.runs) {
        std::printf("alpha=%-8.5g beta=%-8.5g s=%ld: %s in %ld outer steps, residual %.3e (%.1f ms)",
                    run.params.alpha_for(0), run.params.beta_for(0), run.s,
                    run.report.converged ? "converged" : "stopped", run.report.outer_iterations,
                    run.report.final_residual, run.report.wall_seconds * 1e3);
        if (run.oracle_delta) std::printf("  |x-oracle|=%.3e", *run.oracle_delta);
        std::printf("\n");
        if (!run.report.converged && !run.report.diagnostic.empty()) {
            std::printf("  %s\n", run.report.diagnostic.c_str());
        }
    }
}

int finish_runs(const ExperimentRecord& record, const std::string& report_path,
                const std::string& csv_path) {
    if (!report_path.empty()) write_json(record, report_path);
    if (!csv_path.empty()) write_csv(record, csv_path);
    for (const auto& run : record.runs) {
        if (!run.report.converged) return kExitNotConverged;
    }
    return kExitConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-splitting two-stage relaxation solver for weakly nonlinear systems"};
    app.require_subcommand(1);

    // solve / sweep
    ProblemFlags solve_problem, sweep_problem, gen_problem, val_problem, oracle_problem;
    MethodFlags solve_method, sweep_method, val_method;
    std::string solve_report, solve_csv, sweep_report, sweep_csv;
    bool solve_oracle = false, sweep_oracle = false;
    std::string sweep_sums_csv, sweep_ratios_csv;

    CLI::App* cmd_solve = app.add_subcommand("solve", "run the iteration once");
    solve_problem.attach(cmd_solve);
    solve_method.attach(cmd_solve);
    cmd_solve->add_option("--report", solve_report, "write the full JSON record here");
    cmd_solve->add_option("--csv", solve_csv, "write the one-line CSV summary here");
    cmd_solve->add_flag("--with-oracle", solve_oracle, "also run the reference oracle");

    CLI::App* cmd_sweep = app.add_subcommand("sweep", "run a parameter sweep");
    sweep_problem.attach(cmd_sweep);
    sweep_method.attach(cmd_sweep);
    cmd_sweep->add_option("--sweep-sums", sweep_sums_csv, "alpha+beta values (csv)")->required();
    cmd_sweep->add_option("--sweep-ratios", sweep_ratios_csv,
                          "alpha/(alpha+beta) values in [0,1] (csv, default 0.5)");
    cmd_sweep->add_option("--report", sweep_report, "write the full JSON record here");
    cmd_sweep->add_option("--csv", sweep_csv, "write the per-point CSV summary here");
    cmd_sweep->add_flag("--with-oracle", sweep_oracle, "also run the reference oracle");

    // generate
    std::string gen_out;
    CLI::App* cmd_gen = app.add_subcommand("generate", "write a grid problem directory");
    gen_problem.attach(cmd_gen);
    cmd_gen->add_option("--out", gen_out, "output directory")->required();

    // validate
    CLI::App* cmd_val = app.add_subcommand("validate", "check convergence hypotheses");
    val_problem.attach(cmd_val);
    val_method.attach(cmd_val);

    // oracle
    std::string oracle_out;
    bool oracle_store = false;
    double oracle_tol = 1e-12;
    long oracle_max = 10000;
    CLI::App* cmd_oracle = app.add_subcommand("oracle", "run the dense reference iteration");
    oracle_problem.attach(cmd_oracle);
    cmd_oracle->add_option("--out", oracle_out, "write the solution here (one real per line)");
    cmd_oracle->add_flag("--store", oracle_store,
                         "write solution.vec into the problem directory (needs --problem)");
    cmd_oracle->add_option("--tol", oracle_tol, "oracle step tolerance")->capture_default_str();
    cmd_oracle->add_option("--max-outer", oracle_max, "oracle iteration cap")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_solve->parsed() || cmd_sweep->parsed()) {
            const bool is_sweep = cmd_sweep->parsed();
            ProblemFlags& pf = is_sweep ? sweep_problem : solve_problem;
            MethodFlags& mf = is_sweep ? sweep_method : solve_method;

            ExperimentSpec spec;
            WeaklyNonlinearProblem problem = pf.build(spec.problem_source);
            mf.fill(spec);
            if (mf.x0_fill != 0.0) {
                spec.x0 = DenseVector(static_cast<size_t>(problem.dim()), mf.x0_fill);
            }
            spec.with_oracle = is_sweep ? sweep_oracle : solve_oracle;
            if (is_sweep) {
                spec.sweep_sums = parse_doubles(sweep_sums_csv, "--sweep-sums");
                if (!sweep_ratios_csv.empty()) {
                    spec.sweep_ratios = parse_doubles(sweep_ratios_csv, "--sweep-ratios");
                }
            }
            ExperimentRecord record = run_experiment(problem, spec);
            print_record(record);
            return finish_runs(record, is_sweep ? sweep_report : solve_report,
                               is_sweep ? sweep_csv : solve_csv);
        }

        if (cmd_gen->parsed()) {
            std::string source;
            WeaklyNonlinearProblem problem = gen_problem.build(source);
            save_problem(problem, gen_out);
            std::printf("wrote %s (n=%lld, %s)\n", gen_out.c_str(),
                        static_cast<long long>(problem.dim()), problem.name.c_str());
            return kExitConverged;
        }

        if (cmd_val->parsed()) {
            ExperimentSpec spec;
            WeaklyNonlinearProblem problem = val_problem.build(spec.problem_source);
            val_method.fill(spec);
            MultiSplitting ms = build_multisplitting(problem.A, spec.p, spec.strategy,
                                                     spec.partition, spec.overlap);
            const SparseMatrix& p_bound = problem.G.bound();
            HypothesisReport h_rep = validate_h_hypotheses(problem.A, ms, p_bound);
            HypothesisReport m_rep = validate_monotone_hypotheses(problem.A, ms, p_bound);
            for (const HypothesisReport* rep : {&h_rep, &m_rep}) {
                std::printf("%s regime:%s\n", to_string(rep->regime),
                            rep->all_passed() ? " validated" : "");
                for (const auto& check : rep->checks) {
                    std::printf("  [%s] %s%s%s\n", check.passed ? "ok" : "XX", check.name.c_str(),
                                check.detail.empty() ? "" : ": ", check.detail.c_str());
                }
                for (const auto& warning : rep->warnings) {
                    std::printf("  warning: %s\n", warning.c_str());
                }
                if (rep->all_passed()) {
                    std::printf("  admissible alpha+beta in (0, %.6g)\n",
                                rep->parameter_upper_bound);
                }
            }
            return (h_rep.all_passed() || m_rep.all_passed()) ? kExitConverged
                                                              : kExitValidationFailed;
        }

        if (cmd_oracle->parsed()) {
            std::string source;
            WeaklyNonlinearProblem problem = oracle_problem.build(source);
            std::vector<std::string> warnings;
            DenseVector x = picard_oracle(problem, oracle_tol, oracle_max, &warnings);
            for (const auto& warning : warnings) std::printf("warning: %s\n", warning.c_str());
            std::printf("oracle solution: n=%lld, |x|_inf=%.6g, residual %.3e\n",
                        static_cast<long long>(problem.dim()), norm_inf(x),
                        residual(problem, x));
            auto write_vec = [&](const std::filesystem::path& path) {
                std::ofstream out(path);
                if (!out) throw ParseError(path.string() + ": cannot open for writing");
                char buf[64];
                for (double v : x) {
                    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
                    out << buf;
                }
            };
            if (!oracle_out.empty()) write_vec(oracle_out);
            if (oracle_store) {
                if (oracle_problem.problem_dir.empty()) {
                    throw ParameterError("--store needs --problem");
                }
                write_vec(std::filesystem::path(oracle_problem.problem_dir) / "solution.vec");
            }
            return kExitConverged;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInputError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInputError;
    }
    return kExitInputError;
}
