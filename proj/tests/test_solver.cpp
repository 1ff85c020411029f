#include <doctest.h>

#include <cmath>

#include "mstor/dense_solve.hpp"
#include "mstor/solver.hpp"
#include "test_util.hpp"

using namespace mstor;
using test::contains;
using test::mat;

namespace {

WeaklyNonlinearProblem cosine_problem() {
    SparseMatrix a = mat(1, 1, {{0, 0, 2.0}});
    BoundedMap g(1, [](const DenseVector& x) { return DenseVector{std::cos(x[0])}; },
                 SparseMatrix::identity(1), "cos");
    return WeaklyNonlinearProblem(std::move(a), std::move(g), "cosine", std::nullopt, false);
}

// root of 2t - cos(t) on [0, 1], bisected to full precision
double cosine_root() {
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (2.0 * mid - std::cos(mid) > 0.0) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

WeaklyNonlinearProblem constant_2x2() {
    return WeaklyNonlinearProblem(test::tridiag(2),
                                  make_componentwise_map(Nonlinearity::Constant, 2, 1.0, 1.0),
                                  "desk", DenseVector{1.0, 1.0}, false);
}

}  // namespace

TEST_CASE("schedules produce validated sweep counts") {
    InnerSchedule c = InnerSchedule::constant(3);
    CHECK(c.at(0, 0, 4) == 3);
    CHECK(c.at(3, 100, 4) == 3);
    CHECK(c.min_constant() == 3);
    CHECK_THROWS_AS(InnerSchedule::constant(0), ParameterError);

    InnerSchedule ps = InnerSchedule::per_splitting({2, 5});
    CHECK(ps.at(1, 0, 2) == 5);
    CHECK(ps.min_constant() == 2);
    CHECK_THROWS_AS(ps.at(0, 0, 3), ParameterError);  // p mismatch
    CHECK_THROWS_AS(InnerSchedule::per_splitting({2, 0}), ParameterError);
    CHECK_THROWS_AS(InnerSchedule::per_splitting({}), ParameterError);

    InnerSchedule fn = InnerSchedule::function([](index_t l, long outer) {
        return 1 + l + (outer % 2);
    });
    CHECK(fn.at(2, 1, 4) == 4);
    CHECK_FALSE(fn.min_constant().has_value());
    InnerSchedule zero_fn = InnerSchedule::function([](index_t, long) { return 0L; });
    CHECK_THROWS_AS(zero_fn.at(0, 0, 1), ParameterError);
    CHECK_THROWS_AS(InnerSchedule::function(nullptr), ParameterError);
}

TEST_CASE("presets map onto the two-parameter form") {
    auto gs = preset_parameters(MethodFamily::GS);
    CHECK(gs.alpha_for(0) == 2.0);
    CHECK(gs.beta_for(0) == 0.0);

    auto sor = preset_parameters(MethodFamily::SOR, std::nullopt, 0.9);
    CHECK(sor.alpha_for(0) == 1.8);
    CHECK(sor.beta_for(0) == 0.0);

    auto jac = preset_parameters(MethodFamily::Jacobi);
    CHECK(jac.alpha_for(0) == 0.0);
    CHECK(jac.beta_for(0) == 2.0);

    auto jor = preset_parameters(MethodFamily::JOR, std::nullopt, 0.7);
    CHECK(jor.alpha_for(0) == 0.0);
    CHECK(jor.beta_for(0) == 1.4);

    auto aor = preset_parameters(MethodFamily::AOR, 0.3, 0.8);
    CHECK(aor.alpha_for(0) == 0.6);
    CHECK(aor.beta_for(0) == doctest::Approx(1.0));

    try {
        preset_parameters(MethodFamily::TOR);
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        CHECK(contains(e.what(), "alpha and beta"));
    }
    CHECK_THROWS_AS(preset_parameters(MethodFamily::AOR, 0.9, 0.8), ParameterError);
    CHECK_THROWS_AS(preset_parameters(MethodFamily::AOR, std::nullopt, 0.8), ParameterError);
    CHECK_THROWS_AS(preset_parameters(MethodFamily::SOR), ParameterError);
    CHECK_THROWS_AS(preset_parameters(MethodFamily::SOR, std::nullopt, 0.0), ParameterError);
    CHECK_THROWS_AS(preset_parameters(MethodFamily::GS, std::nullopt, 2.0), ParameterError);
    CHECK_THROWS_AS(preset_parameters(MethodFamily::Jacobi, std::nullopt, 0.5), ParameterError);
}

TEST_CASE("family names round-trip") {
    for (auto f : {MethodFamily::TOR, MethodFamily::AOR, MethodFamily::SOR, MethodFamily::GS,
                   MethodFamily::JOR, MethodFamily::Jacobi}) {
        CHECK(family_from_string(to_string(f)) == f);
    }
    CHECK_THROWS_AS(family_from_string("ssor"), ParameterError);
}

TEST_CASE("a single inner sweep is one preconditioned update") {
    SparseMatrix m = mat(2, 2, {{0, 0, 2.0}, {1, 0, -1.0}, {1, 1, 2.0}});
    SparseMatrix n = SparseMatrix::zeros(2, 2);
    DenseVector z = inner_sweep(m, n, {0.0, 0.0}, {1.0, 1.0});
    CHECK(z[0] == 0.5);
    CHECK(z[1] == 0.75);
}

TEST_CASE("local iterates match the dense power-sum form") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SparseMatrix a = test::random_dominant(rng, 4, 0.8, 2.0);
    WeaklyNonlinearProblem problem(a, make_componentwise_map(Nonlinearity::Sine, 4, 0.2),
                                   "ps", std::nullopt, false);
    MultiSplitting ms = build_multisplitting(a, 1, SplittingStrategy::BlockJacobi);
    SolverState state(problem, ms, TorParameters::uniform(1.2, 0.6), DenseVector(4, 0.3));

    DenseVector rhs = {0.4, -0.1, 0.7, 0.2};
    const long s = 3;
    DenseVector z = local_iterate(0, state.x(), rhs, s, state);

    // densely: z_s = (M^-1 N)^s x + sum_{k<s} (M^-1 N)^k M^-1 rhs
    DenseLU mlu(state.M(0));
    DenseVector acc = state.x();
    for (long k = 0; k < s; ++k) {
        DenseVector t = state.N(0).multiply(acc);
        for (size_t i = 0; i < t.size(); ++i) t[i] += rhs[i];
        acc = mlu.solve(t);
    }
    CHECK(max_abs_diff(z, acc) <= 1e-12);
}

TEST_CASE("the residual is the scaled defect") {
    WeaklyNonlinearProblem p = constant_2x2();
    CHECK(residual(p, {1.0, 1.0}) == 0.0);
    // x = (2, 0): Ax = (4, -2), G = (1, 1), defect max = 3, scale 1 + 1
    CHECK(residual(p, {2.0, 0.0}) == 1.5);
}

TEST_CASE("the iteration solves a scalar transcendental equation") {
    WeaklyNonlinearProblem p = cosine_problem();
    MultiSplitting ms = build_multisplitting(p.A, 1, SplittingStrategy::BlockJacobi);
    SolverConfig config;
    config.params = preset_parameters(MethodFamily::GS);
    config.schedule = InnerSchedule::constant(2);
    config.tol_residual = 1e-12;
    IterationReport rep = solve(p, ms, config, {0.0});
    CHECK(rep.converged);
    CHECK(rep.outer_iterations > 0);
    CHECK(rep.final_residual <= 1e-12);
    CHECK(std::abs(rep.solution[0] - cosine_root()) <= 1e-10);
    REQUIRE_FALSE(rep.residual_history.empty());
    CHECK(rep.residual_history.front() > 1e-12);
    CHECK(rep.residual_history.back() == rep.final_residual);
}

TEST_CASE("histories are optional and error tracking needs a known solution") {
    WeaklyNonlinearProblem p = constant_2x2();
    MultiSplitting ms = build_multisplitting(p.A, 1, SplittingStrategy::BlockJacobi);
    SolverConfig config;
    config.tol_residual = 1e-11;

    IterationReport rep = solve(p, ms, config, {0.0, 0.0});
    CHECK(rep.converged);
    CHECK(max_abs_diff(rep.solution, {1.0, 1.0}) <= 1e-10);
    REQUIRE(rep.error_history.has_value());
    CHECK(rep.error_history->size() == rep.residual_history.size());
    CHECK(rep.error_history->back() <= 1e-10);

    config.record_history = false;
    rep = solve(p, ms, config, {0.0, 0.0});
    CHECK(rep.converged);
    CHECK(rep.residual_history.empty());
    CHECK_FALSE(rep.error_history.has_value());
}

TEST_CASE("an overrelaxed diverging run is reported, not thrown") {
    // alpha + beta = 6 on a scalar system gives the inner update z' = -2z + c
    SparseMatrix a = SparseMatrix::identity(1);
    WeaklyNonlinearProblem p(a, make_componentwise_map(Nonlinearity::Constant, 1, 1.0, 1.0),
                             "runaway", std::nullopt, false);
    MultiSplitting ms = build_multisplitting(a, 1, SplittingStrategy::BlockJacobi);
    SolverConfig config;
    config.params = TorParameters::uniform(6.0, 0.0);
    config.tol_residual = 1e-14;
    config.max_outer = 5000;
    config.record_history = false;

    IterationReport rep = solve(p, ms, config, {100.0});
    CHECK_FALSE(rep.converged);
    CHECK(contains(rep.diagnostic, "non-finite"));

    SolverState state(p, ms, config.params, {100.0});
    try {
        for (int k = 0; k < 5000; ++k) outer_step(state, config);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.iteration > 0);
        CHECK(e.index >= 0);
    }
}

TEST_CASE("plain non-convergence sets a diagnostic instead of throwing") {
    WeaklyNonlinearProblem p = constant_2x2();
    MultiSplitting ms = build_multisplitting(p.A, 1, SplittingStrategy::BlockJacobi);
    SolverConfig config;
    config.tol_residual = 1e-14;
    config.max_outer = 1;
    IterationReport rep = solve(p, ms, config, {0.0, 0.0});
    CHECK_FALSE(rep.converged);
    CHECK(rep.outer_iterations == 1);
    CHECK(contains(rep.diagnostic, "limit"));
}

TEST_CASE("solver configuration is validated") {
    WeaklyNonlinearProblem p = constant_2x2();
    MultiSplitting ms = build_multisplitting(p.A, 1, SplittingStrategy::BlockJacobi);
    SolverConfig config;
    config.tol_residual = 0.0;
    CHECK_THROWS_AS(solve(p, ms, config, {0.0, 0.0}), ParameterError);
    config.tol_residual = 1e-10;
    config.max_outer = 0;
    CHECK_THROWS_AS(solve(p, ms, config, {0.0, 0.0}), ParameterError);
    config.max_outer = 10;
    config.worker_count = 0;
    CHECK_THROWS_AS(solve(p, ms, config, {0.0, 0.0}), ParameterError);
    config.worker_count.reset();
    CHECK_THROWS_AS(solve(p, ms, config, {0.0}), DimensionError);
    CHECK_THROWS_AS(solve(p, ms, config, {0.0, std::nan("")}), Error);
}

TEST_CASE("worker counts above p are clamped and change nothing") {
    SparseMatrix a = test::tridiag(9);
    WeaklyNonlinearProblem p(a, make_componentwise_map(Nonlinearity::Arctan, 9, 0.3), "w",
                             std::nullopt, false);
    MultiSplitting ms = build_multisplitting(a, 3, SplittingStrategy::BlockJacobi);
    SolverConfig config;
    config.params = preset_parameters(MethodFamily::SOR, std::nullopt, 0.8);
    config.schedule = InnerSchedule::constant(2);
    config.tol_residual = 1e-11;

    config.worker_count = 1;
    IterationReport one = solve(p, ms, config, DenseVector(9, 0.5));
    config.worker_count = 8;
    IterationReport many = solve(p, ms, config, DenseVector(9, 0.5));
    CHECK(one.converged);
    CHECK(one.residual_history == many.residual_history);
    CHECK(one.solution == many.solution);
}

TEST_CASE("parameter changes rebuild the cached splitting matrices") {
    WeaklyNonlinearProblem p = constant_2x2();
    MultiSplitting ms = build_multisplitting(p.A, 1, SplittingStrategy::BlockJacobi);

    SolverState state(p, ms, preset_parameters(MethodFamily::GS), {0.0, 0.0});
    SolverConfig config;
    config.params = preset_parameters(MethodFamily::GS);
    outer_step(state, config);
    DenseVector after_gs = state.x();
    config.params = preset_parameters(MethodFamily::Jacobi);
    outer_step(state, config);

    SolverState fresh(p, ms, preset_parameters(MethodFamily::Jacobi), after_gs);
    SolverConfig jac_config;
    jac_config.params = preset_parameters(MethodFamily::Jacobi);
    outer_step(fresh, jac_config);
    CHECK(state.x() == fresh.x());

    CHECK_THROWS_AS(state.set_iterate({1.0}), DimensionError);
    CHECK_THROWS_AS(state.set_iterate({1.0, std::nan("")}), Error);
}
