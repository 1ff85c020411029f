#include "mstor/splitting.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace mstor {

namespace {

// Stored values for one position of a cached (M, N) pair. The solver relies
// on M - N recovering B bitwise. The plain difference n = m - b can land on
// a round-to-even tie that no choice of n repairs, so the search shifts m by
// up to two ulps; one step is provably enough once alpha + beta >= 1. Below
// that the diagonal grid is coarser than b's and the plain difference stands.
std::pair<double, double> paired_entries(double m, double b) {
    static constexpr int kShift[] = {0, 1, -1, 2, -2};
    for (int sh : kShift) {
        double mc = m;
        const double toward = sh > 0 ? std::numeric_limits<double>::infinity()
                                     : -std::numeric_limits<double>::infinity();
        for (int k = 0; k < (sh < 0 ? -sh : sh); ++k) mc = std::nextafter(mc, toward);
        const double nc = mc - b;
        if (mc - nc == b) return {mc, nc};
    }
    return {m, m - b};
}

}  // namespace

LowerPartition LowerPartition::custom(std::set<std::pair<index_t, index_t>> mask) {
    LowerPartition p(LowerPartitionKind::CustomMask);
    p.mask_ = std::move(mask);
    return p;
}

bool LowerPartition::assigns_to_v(index_t i, index_t j, index_t n) const {
    switch (kind_) {
        case LowerPartitionKind::AllToV: return true;
        case LowerPartitionKind::AlternateRows: return i % 2 == 1;  // odd rows to V
        case LowerPartitionKind::ColumnHalves: return j < n / 2;
        case LowerPartitionKind::CustomMask: return mask_.count({i, j}) > 0;
    }
    return true;
}

TwoStageSplit two_stage_decompose(const SparseMatrix& b, const LowerPartition& partition) {
    if (!b.square())
        throw DimensionError("two-stage decomposition requires a square matrix");
    const index_t n = b.rows();

    std::vector<Triplet> d_t, v_t, vs_t, u_t;
    for (index_t i = 0; i < n; ++i) {
        auto cols = b.row_cols(i);
        auto vals = b.row_vals(i);
        bool have_diag = false;
        for (size_t k = 0; k < cols.size(); ++k) {
            const index_t j = cols[k];
            const double val = vals[k];
            if (j == i) {
                have_diag = val != 0.0;
                d_t.push_back({i, i, val});
            } else if (j < i) {
                if (partition.assigns_to_v(i, j, n))
                    v_t.push_back({i, j, -val});
                else
                    vs_t.push_back({i, j, -val});
            } else {
                u_t.push_back({i, j, -val});
            }
        }
        if (!have_diag)
            throw SingularMatrixError("zero or missing diagonal entry in row " +
                                      std::to_string(i));
    }

    TwoStageSplit s;
    s.D = SparseMatrix::from_triplets(n, n, std::move(d_t));
    s.V = SparseMatrix::from_triplets(n, n, std::move(v_t));
    s.V_star = SparseMatrix::from_triplets(n, n, std::move(vs_t));
    s.U = SparseMatrix::from_triplets(n, n, std::move(u_t));
    s.B = b;

    // Reconstruction must be bitwise; every part is a copy or negation of an entry of B.
    SparseMatrix r = subtract(subtract(subtract(s.D, s.V), s.V_star), s.U);
    if (!equal_values(r, b))
        throw Error("two-stage decomposition failed to reconstruct B");
    return s;
}

TorParameters TorParameters::uniform(double alpha, double beta) {
    return per_splitting({alpha}, {beta});
}

TorParameters TorParameters::per_splitting(std::vector<double> alphas,
                                           std::vector<double> betas) {
    if (alphas.empty() || alphas.size() != betas.size())
        throw ParameterError("per-splitting parameters need matching nonempty alpha/beta lists");
    for (size_t l = 0; l < alphas.size(); ++l) {
        const double a = alphas[l], b = betas[l];
        if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b))
            throw ParameterError("alpha and beta must be finite and nonnegative (pair " +
                                 std::to_string(l) + ": alpha=" + std::to_string(a) +
                                 ", beta=" + std::to_string(b) + ")");
        if (!(a + b > 0.0))
            throw ParameterError("alpha + beta must be positive (pair " + std::to_string(l) + ")");
    }
    TorParameters p;
    p.mode_ = alphas.size() == 1 ? Mode::Uniform : Mode::PerSplitting;
    p.alphas_ = std::move(alphas);
    p.betas_ = std::move(betas);
    return p;
}

std::pair<SparseMatrix, SparseMatrix> tor_matrices(const TwoStageSplit& split, double alpha,
                                                   double beta) {
    if (!(alpha >= 0.0) || !(beta >= 0.0) || !(alpha + beta > 0.0) || !std::isfinite(alpha) ||
        !std::isfinite(beta))
        throw ParameterError("inadmissible (alpha, beta) = (" + std::to_string(alpha) + ", " +
                             std::to_string(beta) + ")");
    const double apb = alpha + beta;
    const index_t n = split.B.rows();

    std::vector<Triplet> m_t, n_t;
    m_t.reserve(static_cast<size_t>(split.D.nnz() + split.V.nnz() + split.V_star.nnz()));
    n_t.reserve(static_cast<size_t>(split.B.nnz()));
    std::vector<std::pair<index_t, double>> mrow;
    for (index_t i = 0; i < n; ++i) {
        mrow.clear();
        auto vc = split.V.row_cols(i);
        auto vv = split.V.row_vals(i);
        auto wc = split.V_star.row_cols(i);
        auto wv = split.V_star.row_vals(i);
        size_t a = 0, c = 0;
        while (a < vc.size() || c < wc.size()) {
            if (c >= wc.size() || (a < vc.size() && vc[a] < wc[c])) {
                mrow.emplace_back(vc[a], -alpha * vv[a] / apb);
                ++a;
            } else {
                mrow.emplace_back(wc[c], -beta * wv[c] / apb);
                ++c;
            }
        }
        const double d = split.D.at(i, i);
        if (d == 0.0)
            throw SingularMatrixError("zero diagonal entry in row " + std::to_string(i));
        mrow.emplace_back(i, 2.0 * d / apb);

        auto bc = split.B.row_cols(i);
        auto bv = split.B.row_vals(i);
        size_t km = 0, kb = 0;
        while (km < mrow.size() || kb < bc.size()) {
            const index_t jm =
                km < mrow.size() ? mrow[km].first : std::numeric_limits<index_t>::max();
            const index_t jb = kb < bc.size() ? bc[kb] : std::numeric_limits<index_t>::max();
            const index_t j = jm < jb ? jm : jb;
            const auto [me, ne] =
                paired_entries(jm == j ? mrow[km].second : 0.0, jb == j ? bv[kb] : 0.0);
            if (me != 0.0) m_t.push_back({i, j, me});
            if (ne != 0.0) n_t.push_back({i, j, ne});
            if (jm == j) ++km;
            if (jb == j) ++kb;
        }
    }
    SparseMatrix m = SparseMatrix::from_triplets(n, n, std::move(m_t));
    SparseMatrix nmat = SparseMatrix::from_triplets(n, n, std::move(n_t));
    return {std::move(m), std::move(nmat)};
}

void MultiSplitting::validate(const SparseMatrix& a) const {
    const index_t n = a.rows();
    if (p < 1) throw ParameterError("multi-splitting needs p >= 1");
    if (static_cast<index_t>(splits.size()) != p || static_cast<index_t>(C.size()) != p ||
        static_cast<index_t>(E.size()) != p)
        throw DimensionError("multi-splitting part counts disagree with p");
    for (index_t l = 0; l < p; ++l) {
        const size_t lu = static_cast<size_t>(l);
        if (!equal_values(subtract(splits[lu].B, C[lu]), a))
            throw Error("B_l - C_l != A for splitting " + std::to_string(l));
        if (static_cast<index_t>(E[lu].size()) != n)
            throw DimensionError("weight vector length mismatch for splitting " +
                                 std::to_string(l));
        for (double w : E[lu])
            if (!(w >= 0.0) || !(w <= 1.0))
                throw DomainError("weight outside [0,1] in splitting " + std::to_string(l));
    }
    for (index_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (index_t l = 0; l < p; ++l) s += E[static_cast<size_t>(l)][static_cast<size_t>(i)];
        if (std::abs(s - 1.0) > 1e-15)
            throw DomainError("weights at index " + std::to_string(i) + " sum to " +
                              std::to_string(s) + ", not 1");
    }
}

MultiSplitting build_multisplitting(const SparseMatrix& a, index_t p, SplittingStrategy strategy,
                                    const LowerPartition& partition, index_t overlap) {
    if (!a.square())
        throw DimensionError("multi-splitting requires a square matrix");
    const index_t n = a.rows();
    if (p < 1) throw ParameterError("p must be at least 1, got " + std::to_string(p));
    if (p > n)
        throw ParameterError("cannot partition " + std::to_string(n) + " rows into " +
                             std::to_string(p) + " blocks");
    if (overlap < 0) throw ParameterError("overlap must be nonnegative");

    MultiSplitting ms;
    ms.p = p;

    if (strategy == SplittingStrategy::GlobalCopies) {
        const double w = 1.0 / static_cast<double>(p);
        for (index_t l = 0; l < p; ++l) {
            ms.splits.push_back(two_stage_decompose(a, partition));
            ms.C.push_back(SparseMatrix::zeros(n, n));
            ms.E.push_back(DenseVector(static_cast<size_t>(n), w));
        }
        ms.validate(a);
        return ms;
    }

    const index_t k = strategy == SplittingStrategy::BlockOverlap ? overlap : 0;
    std::vector<index_t> lo(static_cast<size_t>(p)), hi(static_cast<size_t>(p));
    std::vector<index_t> coverage(static_cast<size_t>(n), 0);
    for (index_t l = 0; l < p; ++l) {
        const index_t b0 = l * n / p, b1 = (l + 1) * n / p;
        lo[static_cast<size_t>(l)] = std::max<index_t>(0, b0 - k);
        hi[static_cast<size_t>(l)] = std::min<index_t>(n, b1 + k);
        for (index_t i = lo[static_cast<size_t>(l)]; i < hi[static_cast<size_t>(l)]; ++i)
            ++coverage[static_cast<size_t>(i)];
    }

    for (index_t l = 0; l < p; ++l) {
        const index_t b0 = lo[static_cast<size_t>(l)], b1 = hi[static_cast<size_t>(l)];
        auto in_block = [&](index_t i) { return i >= b0 && i < b1; };
        std::vector<Triplet> b_t;
        for (index_t i = 0; i < n; ++i) {
            auto cols = a.row_cols(i);
            auto vals = a.row_vals(i);
            for (size_t kk = 0; kk < cols.size(); ++kk)
                if (cols[kk] == i || (in_block(i) && in_block(cols[kk])))
                    b_t.push_back({i, cols[kk], vals[kk]});
        }
        SparseMatrix bl = SparseMatrix::from_triplets(n, n, std::move(b_t));
        ms.C.push_back(subtract(bl, a));
        ms.splits.push_back(two_stage_decompose(bl, partition));

        DenseVector e(static_cast<size_t>(n), 0.0);
        for (index_t i = b0; i < b1; ++i)
            e[static_cast<size_t>(i)] = 1.0 / static_cast<double>(coverage[static_cast<size_t>(i)]);
        ms.E.push_back(std::move(e));
    }
    ms.validate(a);
    return ms;
}

}  // namespace mstor
