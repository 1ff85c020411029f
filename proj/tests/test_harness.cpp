#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mstor/errors.hpp"
#include "mstor/experiment.hpp"
#include "mstor/matrix_market.hpp"
#include "mstor/problem_io.hpp"
#include "test_util.hpp"

using namespace mstor;
using test::contains;
using test::mat;

namespace {

std::filesystem::path scratch_dir(const std::string& leaf) {
    auto dir = std::filesystem::temp_directory_path() / ("mstor-tests-" + leaf);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

WeaklyNonlinearProblem desk_constant() {
    return WeaklyNonlinearProblem(test::tridiag(2),
                                  make_componentwise_map(Nonlinearity::Constant, 2, 1.0, 1.0),
                                  "desk", DenseVector{1.0, 1.0}, false);
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

TEST_CASE("the reference iteration lands on hand-checkable fixed points") {
    WeaklyNonlinearProblem desk = desk_constant();
    DenseVector x = picard_oracle(desk);
    CHECK(max_abs_diff(x, {1.0, 1.0}) <= 1e-14);

    // scalar 2t = cos(t)
    SparseMatrix a = mat(1, 1, {{0, 0, 2.0}});
    BoundedMap g(1, [](const DenseVector& v) { return DenseVector{std::cos(v[0])}; },
                 SparseMatrix::identity(1), "cos");
    WeaklyNonlinearProblem cosp(a, g, "cosine", std::nullopt, false);
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (2.0 * mid - std::cos(mid) > 0.0 ? hi : lo) = mid;
    }
    CHECK(std::abs(picard_oracle(cosp, 1e-14)[0] - 0.5 * (lo + hi)) <= 1e-12);
}

TEST_CASE("the reference iteration enforces its cap and tolerance") {
    SparseMatrix a = mat(1, 1, {{0, 0, 2.0}});
    BoundedMap g(1, [](const DenseVector& v) { return DenseVector{std::cos(v[0])}; },
                 SparseMatrix::identity(1), "cos");
    WeaklyNonlinearProblem cosp(a, g, "cosine", std::nullopt, false);
    CHECK_THROWS_AS(picard_oracle(cosp, 1e-16, 2), OracleError);
    CHECK_THROWS_AS(picard_oracle(cosp, 0.0), ParameterError);
    CHECK_THROWS_AS(picard_oracle(cosp, 1e-12, 0), ParameterError);
}

TEST_CASE("a non-contractive problem carries a warning out of the oracle") {
    SparseMatrix a = SparseMatrix::identity(1);
    BoundedMap g(1, [](const DenseVector& v) { return DenseVector{std::cos(v[0])}; },
                 SparseMatrix::identity(1), "cos");
    WeaklyNonlinearProblem p(a, g, "borderline", std::nullopt, false);
    std::vector<std::string> warnings;
    DenseVector x = picard_oracle(p, 1e-12, 10000, &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(contains(warnings[0], "contraction"));
    CHECK(std::abs(x[0] - 0.7390851332151607) <= 1e-10);  // the cosine fixed point
}

TEST_CASE("experiments validate the H regime and solve the grid problem") {
    WeaklyNonlinearProblem p = generate_grid_problem(3, Nonlinearity::Sine, 1.0);
    ExperimentSpec spec;
    spec.problem_source = "generated";
    spec.p = 2;
    spec.family = MethodFamily::SOR;
    spec.w = 0.9;
    spec.inner = {2};
    spec.tol = 1e-11;
    spec.with_oracle = true;
    spec.x0 = DenseVector(9, 1.0);

    ExperimentRecord rec = run_experiment(p, spec);
    CHECK(rec.validated);
    CHECK(rec.hypotheses.regime == Regime::HMatrix);
    CHECK(rec.parameter_bound > 2.0);
    REQUIRE(rec.runs.size() == 1);
    CHECK(rec.runs[0].report.converged);
    REQUIRE(rec.runs[0].oracle_delta.has_value());
    CHECK(*rec.runs[0].oracle_delta <= 1e-9);
    CHECK(rec.runs[0].s == 2);
    for (const auto& w : rec.warnings) CHECK_FALSE(contains(w, "s = 1"));
}

TEST_CASE("single inner sweeps draw a warning when a regime is validated") {
    WeaklyNonlinearProblem p = generate_grid_problem(3, Nonlinearity::Sine, 1.0);
    ExperimentSpec spec;
    spec.family = MethodFamily::GS;
    spec.inner = {1};
    spec.tol = 1e-10;
    ExperimentRecord rec = run_experiment(p, spec);
    CHECK(rec.validated);
    bool found = false;
    for (const auto& w : rec.warnings)
        if (contains(w, "s = 1")) found = true;
    CHECK(found);
}

TEST_CASE("experiments proceed without any validated regime, with a warning") {
    SparseMatrix a = mat(2, 2, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 1.0}});
    WeaklyNonlinearProblem p(a, make_componentwise_map(Nonlinearity::Constant, 2, 1.0, 0.0),
                             "loose", std::nullopt, false);
    ExperimentSpec spec;
    spec.family = MethodFamily::GS;
    spec.tol = 1e-10;
    spec.max_outer = 50;
    ExperimentRecord rec = run_experiment(p, spec);
    CHECK_FALSE(rec.validated);
    CHECK(rec.parameter_bound == 0.0);
    bool found = false;
    for (const auto& w : rec.warnings)
        if (contains(w, "without a guarantee")) found = true;
    CHECK(found);
    CHECK(rec.runs.size() == 1);
}

TEST_CASE("sweeps traverse the sum-by-ratio grid in order") {
    WeaklyNonlinearProblem p = desk_constant();
    ExperimentSpec spec;
    spec.sweep_sums = std::vector<double>{1.0, 2.0};
    spec.sweep_ratios = std::vector<double>{0.0, 1.0};
    spec.tol = 1e-11;
    ExperimentRecord rec = run_experiment(p, spec);
    REQUIRE(rec.runs.size() == 4);
    CHECK(rec.runs[0].params.alpha_for(0) == 0.0);  // t=1, q=0
    CHECK(rec.runs[0].params.beta_for(0) == 1.0);
    CHECK(rec.runs[1].params.alpha_for(0) == 1.0);  // t=1, q=1
    CHECK(rec.runs[1].params.beta_for(0) == 0.0);
    CHECK(rec.runs[2].params.beta_for(0) == 2.0);   // t=2, q=0
    CHECK(rec.runs[3].params.alpha_for(0) == 2.0);  // t=2, q=1
    for (const auto& run : rec.runs) CHECK(run.report.converged);
}

TEST_CASE("sweep parameters are validated") {
    WeaklyNonlinearProblem p = desk_constant();
    ExperimentSpec spec;
    spec.sweep_ratios = std::vector<double>{0.5};
    CHECK_THROWS_AS(run_experiment(p, spec), ParameterError);

    spec.sweep_sums = std::vector<double>{1.0};
    spec.sweep_ratios = std::vector<double>{1.5};
    CHECK_THROWS_AS(run_experiment(p, spec), ParameterError);

    spec.sweep_sums = std::vector<double>{};
    spec.sweep_ratios.reset();
    CHECK_THROWS_AS(run_experiment(p, spec), ParameterError);
}

TEST_CASE("exactly one parameter form must be given") {
    WeaklyNonlinearProblem p = desk_constant();
    ExperimentSpec spec;
    CHECK_THROWS_AS(run_experiment(p, spec), ParameterError);  // none

    spec.alpha = 1.0;
    CHECK_THROWS_AS(run_experiment(p, spec), ParameterError);  // alpha without beta
    spec.beta = 0.5;
    CHECK(run_experiment(p, spec).runs.size() == 1);

    spec.alphas = std::vector<double>{1.0};
    spec.betas = std::vector<double>{0.5};
    CHECK(run_experiment(p, spec).runs.size() == 1);  // arrays win over uniform

    spec.alphas = std::vector<double>{1.0, 1.0};
    CHECK_THROWS_AS(run_experiment(p, spec), ParameterError);  // length != p
}

TEST_CASE("records serialize to JSON with the full run detail") {
    WeaklyNonlinearProblem p = desk_constant();
    ExperimentSpec spec;
    spec.problem_source = "unit";
    spec.family = MethodFamily::GS;
    spec.inner = {2};
    spec.tol = 1e-11;
    spec.with_oracle = true;
    ExperimentRecord rec = run_experiment(p, spec);
    nlohmann::json j = record_to_json(rec);

    CHECK(j["schema_version"] == 1);
    CHECK(j["problem"]["name"] == "desk");
    CHECK(j["problem"]["n"] == 2);
    CHECK(j["spec"]["problem_source"] == "unit");
    CHECK(j["spec"]["family"] == "gs");
    CHECK(j["validated"].is_boolean());
    CHECK(j["hypotheses"]["checks"].is_array());
    REQUIRE(j["runs"].size() == 1);
    const auto& r = j["runs"][0];
    CHECK(r["alpha"] == 2.0);
    CHECK(r["beta"] == 0.0);
    CHECK(r["s"] == 2);
    CHECK(r["converged"] == true);
    CHECK(r["outer_iterations"].get<long>() > 0);
    CHECK(r["residual_history"].is_array());
    CHECK(r.contains("oracle_delta"));

    auto dir = scratch_dir("json");
    write_json(rec, dir / "report.json");
    std::ifstream in(dir / "report.json");
    nlohmann::json back = nlohmann::json::parse(in);
    CHECK(back == j);
}

TEST_CASE("CSV summaries agree with the JSON record field for field") {
    WeaklyNonlinearProblem p = desk_constant();
    ExperimentSpec spec;
    spec.p = 1;
    spec.sweep_sums = std::vector<double>{1.0, 1.8};
    spec.tol = 1e-11;
    spec.with_oracle = true;
    ExperimentRecord rec = run_experiment(p, spec);

    auto dir = scratch_dir("csv");
    write_csv(rec, dir / "sweep.csv");
    auto lines = read_lines(dir / "sweep.csv");
    REQUIRE(lines.size() == rec.runs.size() + 1);
    CHECK(lines[0] == "alpha,beta,s,p,outer_iterations,final_residual,converged,wall_ms,oracle_delta");

    nlohmann::json j = record_to_json(rec);
    for (size_t k = 0; k < rec.runs.size(); ++k) {
        auto f = split_csv(lines[k + 1]);
        REQUIRE(f.size() == 9);
        CHECK(std::stod(f[0]) == j["runs"][k]["alpha"].get<double>());
        CHECK(std::stod(f[1]) == j["runs"][k]["beta"].get<double>());
        CHECK(std::stol(f[2]) == j["runs"][k]["s"].get<long>());
        CHECK(std::stol(f[3]) == 1);
        CHECK(std::stol(f[4]) == j["runs"][k]["outer_iterations"].get<long>());
        CHECK(std::stod(f[5]) == j["runs"][k]["final_residual"].get<double>());
        CHECK(f[6] == (j["runs"][k]["converged"].get<bool>() ? "1" : "0"));
        CHECK(std::stod(f[8]) == j["runs"][k]["oracle_delta"].get<double>());
    }

    // without the oracle the trailing field is empty
    spec.with_oracle = false;
    rec = run_experiment(p, spec);
    write_csv(rec, dir / "bare.csv");
    lines = read_lines(dir / "bare.csv");
    auto f = split_csv(lines[1]);
    REQUIRE(f.size() == 9);
    CHECK(f[8].empty());
}

TEST_CASE("problem directories round-trip losslessly") {
    WeaklyNonlinearProblem p = generate_grid_problem(4, Nonlinearity::Sine, 1.0);
    auto dir = scratch_dir("roundtrip");
    save_problem(p, dir);
    CHECK(std::filesystem::exists(dir / "A.mtx"));
    CHECK(std::filesystem::exists(dir / "problem.json"));
    CHECK(std::filesystem::exists(dir / "solution.vec"));  // known zeros

    WeaklyNonlinearProblem back = load_problem(dir);
    CHECK(equal_values(back.A, p.A));
    CHECK(back.name == p.name);
    REQUIRE(back.recipe.has_value());
    CHECK(back.recipe->kind == Nonlinearity::Sine);
    CHECK(back.recipe->coupling == 1.0);
    REQUIRE(back.known_solution.has_value());
    CHECK(max_abs_diff(*back.known_solution, *p.known_solution) == 0.0);
    CHECK_FALSE(back.generated);
    // the rebuilt map evaluates identically
    DenseVector probe(16, 0.7);
    CHECK(max_abs_diff(back.G(probe), p.G(probe)) == 0.0);
}

TEST_CASE("problems without a builtin recipe are stored as external") {
    SparseMatrix a = test::tridiag(3);
    SparseMatrix bound = SparseMatrix::diagonal({0.5, 0.5, 0.5});
    BoundedMap g(3, [](const DenseVector& x) {
        DenseVector y(x.size());
        for (size_t i = 0; i < x.size(); ++i) y[i] = 0.5 * std::tanh(x[i]);
        return y;
    }, bound, "custom tanh");
    WeaklyNonlinearProblem p(a, g, "tanh-problem", std::nullopt, false);

    auto dir = scratch_dir("external");
    save_problem(p, dir);
    CHECK(std::filesystem::exists(dir / "P.mtx"));

    CHECK_THROWS_AS(load_problem(dir), ParameterError);  // needs an evaluator

    WeaklyNonlinearProblem back = load_problem(dir, [](const DenseVector& x) {
        DenseVector y(x.size());
        for (size_t i = 0; i < x.size(); ++i) y[i] = 0.5 * std::tanh(x[i]);
        return y;
    });
    CHECK(equal_values(back.G.bound(), bound));
    CHECK(back.G({0.5, 0.5, 0.5})[0] == 0.5 * std::tanh(0.5));
    CHECK_FALSE(back.recipe.has_value());
}

TEST_CASE("malformed problem directories are rejected with specific errors") {
    auto dir = scratch_dir("malformed");
    CHECK_THROWS_AS(load_problem(dir / "missing"), ParseError);

    // A.mtx alone is not enough
    WeaklyNonlinearProblem p = generate_grid_problem(2, Nonlinearity::Sine, 1.0);
    save_problem(p, dir);
    std::filesystem::remove(dir / "problem.json");
    CHECK_THROWS_AS(load_problem(dir), ParseError);

    save_problem(p, dir);
    {
        std::ofstream meta(dir / "problem.json");
        meta << "{\"schema_version\": 99, \"name\": \"x\", "
                "\"nonlinearity\": {\"kind\": \"sine\", \"coupling\": 1.0}}\n";
    }
    try {
        load_problem(dir);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(contains(e.what(), "schema_version"));
    }

    {
        std::ofstream meta(dir / "problem.json");
        meta << "{not json\n";
    }
    CHECK_THROWS_AS(load_problem(dir), ParseError);

    {
        std::ofstream meta(dir / "problem.json");
        meta << "{\"schema_version\": 1, \"name\": \"x\", "
                "\"nonlinearity\": {\"kind\": \"cubic\", \"coupling\": 1.0}}\n";
    }
    CHECK_THROWS_AS(load_problem(dir), Error);
}

TEST_CASE("solution files are validated line by line") {
    auto dir = scratch_dir("solution");
    WeaklyNonlinearProblem p = generate_grid_problem(2, Nonlinearity::Sine, 1.0);
    save_problem(p, dir);

    {
        std::ofstream sol(dir / "solution.vec");
        sol << "0\n\n0\n0\n0\n";  // blank line is skipped
    }
    CHECK(load_problem(dir).known_solution.has_value());

    {
        std::ofstream sol(dir / "solution.vec");
        sol << "0\n0\n0\n";  // three entries for n = 4
    }
    CHECK_THROWS_AS(load_problem(dir), DimensionError);

    {
        std::ofstream sol(dir / "solution.vec");
        sol << "0\n0 trailing\n0\n0\n";
    }
    try {
        load_problem(dir);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(contains(e.what(), ":2"));
    }
}

TEST_CASE("external problems require a matching bound matrix") {
    auto dir = scratch_dir("extcheck");
    SparseMatrix a = test::tridiag(3);
    {
        write_matrix_market(dir / "A.mtx", a);
        std::ofstream meta(dir / "problem.json");
        meta << "{\"schema_version\": 1, \"name\": \"x\", "
                "\"nonlinearity\": {\"kind\": \"external\"}}\n";
    }
    auto eval = [](const DenseVector& x) { return x; };
    CHECK_THROWS_AS(load_problem(dir, eval), ParseError);  // P.mtx missing

    write_matrix_market(dir / "P.mtx", SparseMatrix::identity(2));
    CHECK_THROWS_AS(load_problem(dir, eval), DimensionError);  // 2x2 bound for n = 3

    write_matrix_market(dir / "P.mtx", SparseMatrix::identity(3));
    CHECK(load_problem(dir, eval).dim() == 3);
}
