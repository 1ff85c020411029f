#include "mstor/problem_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mstor/errors.hpp"
#include "mstor/matrix_market.hpp"

namespace mstor {

namespace {

using nlohmann::json;

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return doc;
}

DenseVector read_solution_vec(const std::filesystem::path& path, index_t n) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open");
    DenseVector x;
    x.reserve(static_cast<size_t>(n));
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos) continue;  // blank line
        std::istringstream ls(line);
        double v;
        if (!(ls >> v)) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected one real per line");
        }
        std::string rest;
        if (ls >> rest) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected one real per line, found trailing '" + rest + "'");
        }
        x.push_back(v);
    }
    if (static_cast<index_t>(x.size()) != n) {
        throw DimensionError(path.string() + ": holds " + std::to_string(x.size()) +
                             " values, matrix dimension is " + std::to_string(n));
    }
    return x;
}

void write_solution_vec(const std::filesystem::path& path, const DenseVector& x) {
    std::ofstream out(path);
    if (!out) throw ParseError(path.string() + ": cannot open for writing");
    char buf[64];
    for (double v : x) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", v);
        out << buf;
    }
    if (!out) throw ParseError(path.string() + ": write failed");
}

}  // namespace

WeaklyNonlinearProblem load_problem(const std::filesystem::path& dir,
                                    const ExternalEvaluator& external) {
    if (!std::filesystem::is_directory(dir)) {
        throw ParseError(dir.string() + ": not a directory");
    }
    const auto a_path = dir / "A.mtx";
    const auto meta_path = dir / "problem.json";
    if (!std::filesystem::exists(a_path)) throw ParseError(a_path.string() + ": missing");
    if (!std::filesystem::exists(meta_path)) throw ParseError(meta_path.string() + ": missing");

    SparseMatrix a = read_matrix_market(a_path);
    if (!a.square()) {
        throw DimensionError(a_path.string() + ": system matrix must be square, got " +
                             std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    }

    json meta = read_json_file(meta_path);
    if (!meta.is_object()) throw ParseError(meta_path.string() + ": top level must be an object");
    const long schema = meta.value("schema_version", 0L);
    if (schema != 1) {
        throw ParseError(meta_path.string() + ": unsupported schema_version " +
                         std::to_string(schema));
    }
    const std::string name = meta.value("name", std::string("unnamed"));
    if (!meta.contains("nonlinearity") || !meta["nonlinearity"].is_object()) {
        throw ParseError(meta_path.string() + ": missing nonlinearity object");
    }
    const json& nl = meta["nonlinearity"];
    const std::string kind_name = nl.value("kind", std::string());
    if (kind_name.empty()) throw ParseError(meta_path.string() + ": nonlinearity.kind missing");

    BoundedMap g = [&]() -> BoundedMap {
        if (kind_name == "external") {
            const auto p_path = dir / "P.mtx";
            if (!std::filesystem::exists(p_path)) {
                throw ParseError(p_path.string() + ": required for an external nonlinearity");
            }
            SparseMatrix p = read_matrix_market(p_path);
            if (p.rows() != a.rows() || p.cols() != a.cols()) {
                throw DimensionError(p_path.string() + ": P is " + std::to_string(p.rows()) + "x" +
                                     std::to_string(p.cols()) + ", A is " +
                                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
            }
            if (!external) {
                throw ParameterError(dir.string() +
                                     ": external nonlinearity needs a caller-supplied evaluator");
            }
            return BoundedMap(a.rows(), external, std::move(p), "external");
        }
        const Nonlinearity kind = nonlinearity_from_string(kind_name);
        const double coupling = nl.value("coupling", 1.0);
        const double c = nl.value("c", 0.0);
        return make_componentwise_map(kind, a.rows(), coupling, c);
    }();

    std::optional<DenseVector> solution;
    const auto sol_path = dir / "solution.vec";
    if (std::filesystem::exists(sol_path)) solution = read_solution_vec(sol_path, a.rows());

    WeaklyNonlinearProblem problem(std::move(a), std::move(g), name, std::move(solution), false);
    if (kind_name != "external") {
        NonlinearityRecipe recipe;
        recipe.kind = nonlinearity_from_string(kind_name);
        recipe.coupling = nl.value("coupling", 1.0);
        recipe.constant_value = nl.value("c", 0.0);
        problem.recipe = recipe;
    }
    return problem;
}

void save_problem(const WeaklyNonlinearProblem& problem, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_matrix_market(dir / "A.mtx", problem.A);

    json nl;
    if (problem.recipe) {
        nl["kind"] = to_string(problem.recipe->kind);
        nl["coupling"] = problem.recipe->coupling;
        if (problem.recipe->kind == Nonlinearity::Constant) nl["c"] = problem.recipe->constant_value;
    } else {
        nl["kind"] = "external";
        write_matrix_market(dir / "P.mtx", problem.G.bound());
    }

    json meta;
    meta["schema_version"] = 1;
    meta["name"] = problem.name;
    meta["nonlinearity"] = nl;

    std::ofstream out(dir / "problem.json");
    if (!out) throw ParseError((dir / "problem.json").string() + ": cannot open for writing");
    out << meta.dump(2) << "\n";
    if (!out) throw ParseError((dir / "problem.json").string() + ": write failed");

    if (problem.known_solution) write_solution_vec(dir / "solution.vec", *problem.known_solution);
}

}  // namespace mstor
