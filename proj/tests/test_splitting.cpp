#include <doctest.h>

#include "mstor/splitting.hpp"
#include "test_util.hpp"

using namespace mstor;
using test::contains;
using test::mat;

namespace {

SparseMatrix recombine(const TwoStageSplit& s) {
    return subtract(subtract(subtract(s.D, s.V), s.V_star), s.U);
}

}  // namespace

TEST_CASE("two-stage decomposition reconstructs B bitwise") {
    std::mt19937_64 rng(41);
    LowerPartition parts[] = {LowerPartition::all_to_v(), LowerPartition::alternate_rows(),
                              LowerPartition::column_halves()};
    for (int trial = 0; trial < 15; ++trial) {
        SparseMatrix b = test::random_dominant(rng, 13, 0.4, 1.2);
        for (const auto& part : parts) {
            TwoStageSplit s = two_stage_decompose(b, part);
            CHECK(equal_values(recombine(s), b));
            CHECK(s.D.nnz() == b.rows());
            // V and V* are strictly lower with disjoint patterns, U strictly upper
            for (index_t i = 0; i < b.rows(); ++i) {
                for (index_t j : s.V.row_cols(i)) {
                    CHECK(j < i);
                    CHECK(s.V_star.at(i, j) == 0.0);
                }
                for (index_t j : s.V_star.row_cols(i)) CHECK(j < i);
                for (index_t j : s.U.row_cols(i)) CHECK(j > i);
            }
        }
    }
    CHECK_THROWS_AS(two_stage_decompose(SparseMatrix::zeros(2, 3), LowerPartition::all_to_v()),
                    DimensionError);
}

TEST_CASE("partition choices route lower entries as documented") {
    // entries: (1,0), (2,0), (2,1), (3,1) on a 4x4 frame
    SparseMatrix b = mat(4, 4, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}, {3, 3, 1.0},
                                {1, 0, -5.0}, {2, 0, -6.0}, {2, 1, -7.0}, {3, 1, -8.0}});
    TwoStageSplit all = two_stage_decompose(b, LowerPartition::all_to_v());
    CHECK(all.V.nnz() == 4);
    CHECK(all.V_star.nnz() == 0);
    CHECK(all.V.at(1, 0) == 5.0);  // stored negated: B = D - V - V* - U

    TwoStageSplit rows = two_stage_decompose(b, LowerPartition::alternate_rows());
    CHECK(rows.V.at(1, 0) == 5.0);   // odd rows go to V
    CHECK(rows.V.at(3, 1) == 8.0);
    CHECK(rows.V_star.at(2, 0) == 6.0);
    CHECK(rows.V_star.at(2, 1) == 7.0);

    TwoStageSplit cols = two_stage_decompose(b, LowerPartition::column_halves());
    CHECK(cols.V.at(1, 0) == 5.0);  // j < n/2 goes to V
    CHECK(cols.V.at(2, 0) == 6.0);
    CHECK(cols.V.at(2, 1) == 7.0);
    CHECK(cols.V.at(3, 1) == 8.0);
    CHECK(cols.V_star.nnz() == 0);

    TwoStageSplit custom =
        two_stage_decompose(b, LowerPartition::custom({{1, 0}, {3, 1}}));
    CHECK(custom.V.at(1, 0) == 5.0);
    CHECK(custom.V.at(3, 1) == 8.0);
    CHECK(custom.V_star.at(2, 0) == 6.0);
    CHECK(custom.V.nnz() == 2);
}

TEST_CASE("relaxation matrices reduce to the classical stationary methods") {
    std::mt19937_64 rng(43);
    SparseMatrix b = test::random_dominant(rng, 9, 0.5, 1.5);
    TwoStageSplit s = two_stage_decompose(b, LowerPartition::all_to_v());

    auto [m_gs, n_gs] = tor_matrices(s, 2.0, 0.0);
    // Gauss-Seidel: M is the lower part of B including the diagonal, N = -U part
    for (index_t i = 0; i < b.rows(); ++i) {
        CHECK(m_gs.at(i, i) == b.at(i, i));
        for (index_t j : b.row_cols(i)) {
            if (j < i) CHECK(m_gs.at(i, j) == b.at(i, j));
            if (j > i) CHECK(n_gs.at(i, j) == -b.at(i, j));
        }
    }
    CHECK(equal_values(subtract(m_gs, n_gs), b));

    auto [m_j, n_j] = tor_matrices(s, 0.0, 2.0);
    // Jacobi: M is the diagonal
    CHECK(equal_values(m_j, s.D));
    CHECK(equal_values(subtract(m_j, n_j), b));
}

TEST_CASE("M is lower triangular with the scaled diagonal") {
    SparseMatrix b = test::tridiag(6);
    TwoStageSplit s = two_stage_decompose(b, LowerPartition::all_to_v());
    const double alpha = 1.3, beta = 0.4;
    auto [m, n] = tor_matrices(s, alpha, beta);
    for (index_t i = 0; i < 6; ++i) {
        for (index_t j : m.row_cols(i)) CHECK(j <= i);
        CHECK(m.at(i, i) == 2.0 * 2.0 / (alpha + beta));
    }
    CHECK(n.rows() == 6);
}

TEST_CASE("M - N recovers B bitwise across the practical parameter range") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    LowerPartition parts[] = {LowerPartition::all_to_v(), LowerPartition::alternate_rows(),
                              LowerPartition::column_halves()};
    for (int trial = 0; trial < 60; ++trial) {
        SparseMatrix b = test::random_dominant(rng, 11, 0.45, 1.1);
        TwoStageSplit s = two_stage_decompose(b, parts[trial % 3]);
        const double sum = 1.0 + 2.95 * unit(rng);
        const double q = unit(rng);
        auto [m, n] = tor_matrices(s, q * sum, (1.0 - q) * sum);
        CHECK(equal_values(subtract(m, n), b));
    }
    // below a sum of 1 the identity can only hold to rounding
    for (int trial = 0; trial < 20; ++trial) {
        SparseMatrix b = test::random_dominant(rng, 11, 0.45, 1.1);
        TwoStageSplit s = two_stage_decompose(b, LowerPartition::all_to_v());
        const double sum = 0.05 + 0.9 * unit(rng);
        auto [m, n] = tor_matrices(s, sum, 0.0);
        double scale = 0.0;
        for (index_t i = 0; i < b.rows(); ++i) scale = std::max(scale, std::abs(m.at(i, i)));
        CHECK(max_abs_diff(subtract(m, n), b) <= 1e-15 * scale);
    }
}

TEST_CASE("inadmissible relaxation parameters are rejected") {
    TwoStageSplit s = two_stage_decompose(test::tridiag(3), LowerPartition::all_to_v());
    CHECK_THROWS_AS(tor_matrices(s, -0.1, 1.0), ParameterError);
    CHECK_THROWS_AS(tor_matrices(s, 0.0, 0.0), ParameterError);
    CHECK_THROWS_AS(tor_matrices(s, std::nan(""), 1.0), ParameterError);

    SparseMatrix zero_diag = mat(2, 2, {{0, 0, 1.0}, {1, 0, 1.0}});
    CHECK_THROWS_AS(two_stage_decompose(zero_diag, LowerPartition::all_to_v()),
                    SingularMatrixError);

    // a hand-assembled split can still be missing a diagonal entry
    TwoStageSplit sz;
    sz.B = zero_diag;
    sz.D = mat(2, 2, {{0, 0, 1.0}});
    sz.V = mat(2, 2, {{1, 0, -1.0}});
    sz.V_star = SparseMatrix::zeros(2, 2);
    sz.U = SparseMatrix::zeros(2, 2);
    CHECK_THROWS_AS(tor_matrices(sz, 1.0, 1.0), SingularMatrixError);
}

TEST_CASE("parameter containers validate and compare") {
    TorParameters u = TorParameters::uniform(1.5, 0.5);
    CHECK(u.mode() == TorParameters::Mode::Uniform);
    CHECK(u.alpha_for(3) == 1.5);
    CHECK(u.beta_for(7) == 0.5);

    TorParameters ps = TorParameters::per_splitting({1.0, 2.0}, {0.5, 0.0});
    CHECK(ps.size() == 2);
    CHECK(ps.alpha_for(1) == 2.0);
    CHECK(ps.beta_for(0) == 0.5);
    CHECK(u == u);
    CHECK_FALSE(u == ps);

    CHECK_THROWS_AS(TorParameters::uniform(-1.0, 2.0), ParameterError);
    CHECK_THROWS_AS(TorParameters::uniform(0.0, 0.0), ParameterError);
    CHECK_THROWS_AS(TorParameters::per_splitting({1.0}, {0.5, 0.5}), ParameterError);
    CHECK_THROWS_AS(TorParameters::per_splitting({}, {}), ParameterError);
    CHECK_THROWS_AS(TorParameters::per_splitting({1.0, 0.0}, {1.0, 0.0}), ParameterError);
}

TEST_CASE("multi-splitting construction satisfies its invariants") {
    std::mt19937_64 rng(53);
    SparseMatrix a = test::random_dominant(rng, 12, 0.4, 1.3);

    for (auto strategy : {SplittingStrategy::BlockJacobi, SplittingStrategy::BlockOverlap,
                          SplittingStrategy::GlobalCopies}) {
        MultiSplitting ms = build_multisplitting(a, 3, strategy, LowerPartition::all_to_v(),
                                                 strategy == SplittingStrategy::BlockOverlap ? 2 : 0);
        CHECK(ms.p == 3);
        CHECK(ms.dim() == 12);
        for (index_t l = 0; l < 3; ++l) {
            CHECK(equal_values(subtract(ms.splits[static_cast<size_t>(l)].B,
                                        ms.C[static_cast<size_t>(l)]),
                               a));
        }
        for (index_t i = 0; i < 12; ++i) {
            double sum = 0.0;
            for (index_t l = 0; l < 3; ++l) sum += ms.E[static_cast<size_t>(l)][static_cast<size_t>(i)];
            CHECK(std::abs(sum - 1.0) <= 1e-15);
        }
    }

    // global copies average p identical splittings of A itself
    MultiSplitting gc = build_multisplitting(a, 4, SplittingStrategy::GlobalCopies);
    for (index_t l = 0; l < 4; ++l) {
        CHECK(equal_values(gc.splits[static_cast<size_t>(l)].B, a));
        CHECK(gc.C[static_cast<size_t>(l)].nnz() == 0);
        CHECK(gc.E[static_cast<size_t>(l)][0] == 0.25);
    }
}

TEST_CASE("multi-splitting rejects bad shapes and detects tampering") {
    SparseMatrix a = test::tridiag(6);
    CHECK_THROWS_AS(build_multisplitting(a, 0, SplittingStrategy::BlockJacobi), ParameterError);
    CHECK_THROWS_AS(build_multisplitting(a, 7, SplittingStrategy::BlockJacobi), ParameterError);
    CHECK_THROWS_AS(build_multisplitting(SparseMatrix::zeros(2, 3), 1,
                                         SplittingStrategy::BlockJacobi),
                    DimensionError);

    MultiSplitting ms = build_multisplitting(a, 2, SplittingStrategy::BlockJacobi);
    ms.E[0][0] = 0.7;  // breaks the partition of unity
    CHECK_THROWS_AS(ms.validate(a), Error);
}

TEST_CASE("overlapping blocks share rows with fractional weights") {
    SparseMatrix a = test::tridiag(8);
    MultiSplitting ms = build_multisplitting(a, 2, SplittingStrategy::BlockOverlap,
                                             LowerPartition::all_to_v(), 1);
    ms.validate(a);
    bool fractional = false;
    for (const auto& e : ms.E)
        for (double w : e)
            if (w > 0.0 && w < 1.0) fractional = true;
    CHECK(fractional);
}
