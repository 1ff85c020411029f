// Problem directories: A.mtx + problem.json, optional P.mtx and solution.vec.
#pragma once

#include <filesystem>
#include <functional>
#include <optional>

#include "mstor/nonlinear.hpp"

namespace mstor {

using ExternalEvaluator = std::function<DenseVector(const DenseVector&)>;

// problem.json schema (version 1):
//   { "schema_version": 1, "name": "...",
//     "nonlinearity": { "kind": "sine|arctan|expdecay|const|external",
//                       "coupling": <real>, "c": <real> } }
// kind "external" requires P.mtx next to it and a caller-supplied evaluator;
// solution.vec, when present, holds one real per line, n lines.
WeaklyNonlinearProblem load_problem(const std::filesystem::path& dir,
                                    const ExternalEvaluator& external = nullptr);

// Writes A.mtx, problem.json, and solution.vec when known. Problems without a
// builtin recipe also get P.mtx and are declared "external".
void save_problem(const WeaklyNonlinearProblem& problem, const std::filesystem::path& dir);

}  // namespace mstor
