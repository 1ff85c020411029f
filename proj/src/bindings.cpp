#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mstor/classify.hpp"
#include "mstor/dense_solve.hpp"
#include "mstor/experiment.hpp"
#include "mstor/matrix_market.hpp"
#include "mstor/problem_io.hpp"
#include "mstor/solver.hpp"
#include "mstor/spectral.hpp"

namespace py = pybind11;
using namespace mstor;

namespace {

// Python evaluators must reacquire the GIL: solve() releases it, and the map
// is always called from the controlling thread.
BoundedMap::Evaluator wrap_evaluator(py::function f) {
    return [f = std::move(f)](const DenseVector& x) -> DenseVector {
        py::gil_scoped_acquire gil;
        return f(x).cast<DenseVector>();
    };
}

std::vector<std::vector<double>> to_dense(const SparseMatrix& a) {
    std::vector<std::vector<double>> out(static_cast<size_t>(a.rows()),
                                         std::vector<double>(static_cast<size_t>(a.cols()), 0.0));
    for (index_t i = 0; i < a.rows(); ++i) {
        auto cols = a.row_cols(i);
        auto vals = a.row_vals(i);
        for (size_t k = 0; k < cols.size(); ++k) {
            out[static_cast<size_t>(i)][static_cast<size_t>(cols[k])] = vals[k];
        }
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "multi-splitting two-stage relaxation solver for weakly nonlinear systems";

    py::register_exception<Error>(m, "MstorError", PyExc_RuntimeError);

    // sparse matrices
    py::class_<SparseMatrix>(m, "SparseMatrix")
        .def_static(
            "from_triplets",
            [](index_t rows, index_t cols,
               const std::vector<std::tuple<index_t, index_t, double>>& entries) {
                std::vector<Triplet> ts;
                ts.reserve(entries.size());
                for (const auto& [i, j, v] : entries) ts.push_back({i, j, v});
                return SparseMatrix::from_triplets(rows, cols, std::move(ts));
            },
            py::arg("rows"), py::arg("cols"), py::arg("entries"))
        .def_static("identity", &SparseMatrix::identity, py::arg("n"))
        .def_static("diagonal", &SparseMatrix::diagonal, py::arg("d"))
        .def_static("zeros", &SparseMatrix::zeros, py::arg("rows"), py::arg("cols"))
        .def_property_readonly("rows", &SparseMatrix::rows)
        .def_property_readonly("cols", &SparseMatrix::cols)
        .def_property_readonly("nnz", &SparseMatrix::nnz)
        .def("at", &SparseMatrix::at, py::arg("i"), py::arg("j"))
        .def("multiply", &SparseMatrix::multiply, py::arg("x"))
        .def("diag", &SparseMatrix::diag)
        .def("norm_inf", &SparseMatrix::norm_inf)
        .def("min_value", &SparseMatrix::min_value)
        .def("is_nonnegative", &SparseMatrix::is_nonnegative)
        .def("to_dense", [](const SparseMatrix& a) { return to_dense(a); })
        .def("entries",
             [](const SparseMatrix& a) {
                 std::vector<std::tuple<index_t, index_t, double>> out;
                 out.reserve(static_cast<size_t>(a.nnz()));
                 for (index_t i = 0; i < a.rows(); ++i) {
                     auto cols = a.row_cols(i);
                     auto vals = a.row_vals(i);
                     for (size_t k = 0; k < cols.size(); ++k) {
                         out.emplace_back(i, cols[k], vals[k]);
                     }
                 }
                 return out;
             })
        .def("__repr__", [](const SparseMatrix& a) {
            return "<SparseMatrix " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                   ", nnz=" + std::to_string(a.nnz()) + ">";
        });

    m.def("abs_matrix", &abs_matrix, py::arg("a"));
    m.def("comparison_matrix", &comparison_matrix, py::arg("a"));
    m.def("add", &add, py::arg("a"), py::arg("b"));
    m.def("subtract", &subtract, py::arg("a"), py::arg("b"));
    m.def("equal_values", &equal_values, py::arg("a"), py::arg("b"));
    m.def("matrix_max_abs_diff",
          static_cast<double (*)(const SparseMatrix&, const SparseMatrix&)>(&max_abs_diff),
          py::arg("a"), py::arg("b"));
    m.def("lower_triangular_solve", &lower_triangular_solve, py::arg("L"), py::arg("b"));

    m.def(
        "read_matrix_market",
        [](const std::filesystem::path& path) { return read_matrix_market(path); },
        py::arg("path"));
    m.def(
        "write_matrix_market",
        [](const std::filesystem::path& path, const SparseMatrix& a) {
            write_matrix_market(path, a);
        },
        py::arg("path"), py::arg("a"));

    m.def("dense_lu_solve", &dense_lu_solve, py::arg("a"), py::arg("b"));
    m.def("spectral_radius_nonneg", &spectral_radius_nonneg, py::arg("m"),
          py::arg("tol") = 1e-10, py::arg("max_iters") = 100000L);

    // classification
    py::enum_<ClassifyMethod>(m, "ClassifyMethod")
        .value("NONE", ClassifyMethod::None)
        .value("DIAGONAL_DOMINANCE", ClassifyMethod::DiagonalDominance)
        .value("SCALING_ITERATION", ClassifyMethod::ScalingIteration)
        .value("DENSE_INVERSE", ClassifyMethod::DenseInverse);
    py::class_<MatrixClassReport>(m, "MatrixClassReport")
        .def_readonly("is_m_matrix", &MatrixClassReport::is_m_matrix)
        .def_readonly("is_h_matrix", &MatrixClassReport::is_h_matrix)
        .def_readonly("is_monotone", &MatrixClassReport::is_monotone)
        .def_readonly("witness", &MatrixClassReport::witness)
        .def_readonly("method", &MatrixClassReport::method)
        .def_readonly("reason", &MatrixClassReport::reason);
    m.def("is_m_matrix", &is_m_matrix, py::arg("a"));
    m.def("is_h_matrix", &is_h_matrix, py::arg("a"));
    m.def("is_monotone_matrix", &is_monotone_matrix, py::arg("a"));

    // splittings
    py::class_<LowerPartition>(m, "LowerPartition")
        .def_static("all_to_v", &LowerPartition::all_to_v)
        .def_static("alternate_rows", &LowerPartition::alternate_rows)
        .def_static("column_halves", &LowerPartition::column_halves)
        .def_static(
            "custom",
            [](const std::vector<std::pair<index_t, index_t>>& mask) {
                return LowerPartition::custom(
                    std::set<std::pair<index_t, index_t>>(mask.begin(), mask.end()));
            },
            py::arg("mask"));
    py::class_<TwoStageSplit>(m, "TwoStageSplit")
        .def_readonly("D", &TwoStageSplit::D)
        .def_readonly("V", &TwoStageSplit::V)
        .def_readonly("V_star", &TwoStageSplit::V_star)
        .def_readonly("U", &TwoStageSplit::U)
        .def_readonly("B", &TwoStageSplit::B);
    m.def("two_stage_decompose", &two_stage_decompose, py::arg("b"), py::arg("partition"));

    py::class_<TorParameters>(m, "TorParameters")
        .def_static("uniform", &TorParameters::uniform, py::arg("alpha"), py::arg("beta"))
        .def_static("per_splitting", &TorParameters::per_splitting, py::arg("alphas"),
                    py::arg("betas"))
        .def("alpha_for", &TorParameters::alpha_for, py::arg("l"))
        .def("beta_for", &TorParameters::beta_for, py::arg("l"))
        .def("__eq__",
             [](const TorParameters& a, const TorParameters& b) { return a == b; });
    m.def(
        "tor_matrices",
        [](const TwoStageSplit& split, double alpha, double beta) {
            return tor_matrices(split, alpha, beta);
        },
        py::arg("split"), py::arg("alpha"), py::arg("beta"));

    py::enum_<SplittingStrategy>(m, "SplittingStrategy")
        .value("BLOCK_JACOBI", SplittingStrategy::BlockJacobi)
        .value("BLOCK_OVERLAP", SplittingStrategy::BlockOverlap)
        .value("GLOBAL_COPIES", SplittingStrategy::GlobalCopies);
    py::class_<MultiSplitting>(m, "MultiSplitting")
        .def_readonly("p", &MultiSplitting::p)
        .def_readonly("splits", &MultiSplitting::splits)
        .def_readonly("C", &MultiSplitting::C)
        .def_readonly("E", &MultiSplitting::E)
        .def("validate", &MultiSplitting::validate, py::arg("a"));
    m.def("build_multisplitting", &build_multisplitting, py::arg("a"), py::arg("p"),
          py::arg("strategy"), py::arg("partition") = LowerPartition::all_to_v(),
          py::arg("overlap") = index_t{0});

    // hypotheses
    py::enum_<Regime>(m, "Regime")
        .value("H_MATRIX", Regime::HMatrix)
        .value("MONOTONE", Regime::Monotone);
    py::class_<HypothesisCheck>(m, "HypothesisCheck")
        .def_readonly("name", &HypothesisCheck::name)
        .def_readonly("passed", &HypothesisCheck::passed)
        .def_readonly("detail", &HypothesisCheck::detail);
    py::class_<HypothesisReport>(m, "HypothesisReport")
        .def_readonly("regime", &HypothesisReport::regime)
        .def_readonly("checks", &HypothesisReport::checks)
        .def_readonly("rho_value", &HypothesisReport::rho_value)
        .def_readonly("parameter_upper_bound", &HypothesisReport::parameter_upper_bound)
        .def_readonly("warnings", &HypothesisReport::warnings)
        .def("all_passed", &HypothesisReport::all_passed);
    m.def("validate_h_hypotheses", &validate_h_hypotheses, py::arg("a"), py::arg("ms"),
          py::arg("p"));
    m.def("validate_monotone_hypotheses", &validate_monotone_hypotheses, py::arg("a"),
          py::arg("ms"), py::arg("p"));
    m.def("tor_parameter_bound", &tor_parameter_bound, py::arg("a"), py::arg("p"),
          py::arg("regime"));

    // nonlinear maps and problems
    py::enum_<Nonlinearity>(m, "Nonlinearity")
        .value("SINE", Nonlinearity::Sine)
        .value("ARCTAN", Nonlinearity::Arctan)
        .value("EXP_DECAY", Nonlinearity::ExpDecay)
        .value("CONSTANT", Nonlinearity::Constant);
    py::class_<BoundedMap>(m, "BoundedMap")
        .def(py::init([](index_t n, py::function evaluator, SparseMatrix p,
                         const std::string& description) {
                 return BoundedMap(n, wrap_evaluator(std::move(evaluator)), std::move(p),
                                   description);
             }),
             py::arg("n"), py::arg("evaluator"), py::arg("p"), py::arg("description") = "")
        .def_property_readonly("dim", &BoundedMap::dim)
        .def_property_readonly("bound", &BoundedMap::bound)
        .def_property_readonly("description", &BoundedMap::description)
        .def("__call__", [](const BoundedMap& g, const DenseVector& x) { return g(x); });
    m.def("make_componentwise_map", &make_componentwise_map, py::arg("kind"), py::arg("n"),
          py::arg("coupling"), py::arg("constant_value") = 0.0);

    py::class_<PBoundReport>(m, "PBoundReport")
        .def_readonly("samples", &PBoundReport::samples)
        .def_readonly("violations", &PBoundReport::violations)
        .def_readonly("worst_margin", &PBoundReport::worst_margin)
        .def_readonly("worst_index", &PBoundReport::worst_index);
    m.def("verify_p_bound", &verify_p_bound, py::arg("g"), py::arg("samples") = 1000L,
          py::arg("radius") = 100.0, py::arg("seed") = std::uint64_t{0},
          py::call_guard<py::gil_scoped_release>());

    py::class_<WeaklyNonlinearProblem>(m, "WeaklyNonlinearProblem")
        .def(py::init<SparseMatrix, BoundedMap, std::string, std::optional<DenseVector>, bool>(),
             py::arg("a"), py::arg("g"), py::arg("name"),
             py::arg("known_solution") = std::nullopt, py::arg("generated") = false)
        .def_readonly("A", &WeaklyNonlinearProblem::A)
        .def_readonly("G", &WeaklyNonlinearProblem::G)
        .def_readonly("name", &WeaklyNonlinearProblem::name)
        .def_readonly("known_solution", &WeaklyNonlinearProblem::known_solution)
        .def_readonly("notes", &WeaklyNonlinearProblem::notes)
        .def("dim", &WeaklyNonlinearProblem::dim);
    m.def("generate_grid_problem", &generate_grid_problem, py::arg("m"), py::arg("kind"),
          py::arg("coupling"), py::arg("constant_value") = 0.0);
    m.def("grid_laplacian", &grid_laplacian, py::arg("m"));

    // solver
    py::enum_<MethodFamily>(m, "MethodFamily")
        .value("TOR", MethodFamily::TOR)
        .value("AOR", MethodFamily::AOR)
        .value("SOR", MethodFamily::SOR)
        .value("GS", MethodFamily::GS)
        .value("JOR", MethodFamily::JOR)
        .value("JACOBI", MethodFamily::Jacobi);
    m.def("preset_parameters", &preset_parameters, py::arg("family"),
          py::arg("r") = std::nullopt, py::arg("w") = std::nullopt);

    py::class_<InnerSchedule>(m, "InnerSchedule")
        .def_static("constant", &InnerSchedule::constant, py::arg("s"))
        .def_static("per_splitting", &InnerSchedule::per_splitting, py::arg("s"));

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("params", &SolverConfig::params)
        .def_readwrite("schedule", &SolverConfig::schedule)
        .def_readwrite("tol_residual", &SolverConfig::tol_residual)
        .def_readwrite("max_outer", &SolverConfig::max_outer)
        .def_readwrite("worker_count", &SolverConfig::worker_count)
        .def_readwrite("record_history", &SolverConfig::record_history)
        .def_readwrite("parameter_bound", &SolverConfig::parameter_bound);

    py::class_<IterationReport>(m, "IterationReport")
        .def_readonly("converged", &IterationReport::converged)
        .def_readonly("outer_iterations", &IterationReport::outer_iterations)
        .def_readonly("final_residual", &IterationReport::final_residual)
        .def_readonly("solution", &IterationReport::solution)
        .def_readonly("residual_history", &IterationReport::residual_history)
        .def_readonly("error_history", &IterationReport::error_history)
        .def_readonly("wall_seconds", &IterationReport::wall_seconds)
        .def_readonly("parameter_bound_used", &IterationReport::parameter_bound_used)
        .def_readonly("diagnostic", &IterationReport::diagnostic);

    m.def("solve", &solve, py::arg("problem"), py::arg("ms"), py::arg("config"), py::arg("x0"),
          py::call_guard<py::gil_scoped_release>());
    m.def("residual", &residual, py::arg("problem"), py::arg("x"));

    // harness
    m.def(
        "load_problem",
        [](const std::filesystem::path& dir, std::optional<py::function> external) {
            if (external) return load_problem(dir, wrap_evaluator(std::move(*external)));
            return load_problem(dir);
        },
        py::arg("dir"), py::arg("external") = std::nullopt);
    m.def("save_problem", &save_problem, py::arg("problem"), py::arg("dir"));
    m.def(
        "picard_oracle",
        [](const WeaklyNonlinearProblem& problem, double tol, long max_iters) {
            std::vector<std::string> warnings;
            DenseVector x = picard_oracle(problem, tol, max_iters, &warnings);
            return std::make_pair(std::move(x), std::move(warnings));
        },
        py::arg("problem"), py::arg("tol") = 1e-12, py::arg("max_iters") = 10000L);
}
