// Two-stage splittings B = D - V - V* - U, TOR matrices M/N, and weighted
// multi-splittings A = B_l - C_l with diagonal weights E_l summing to I.
#pragma once

#include <set>
#include <utility>
#include <vector>

#include "mstor/sparse.hpp"

namespace mstor {

enum class LowerPartitionKind { AllToV, AlternateRows, ColumnHalves, CustomMask };

// Assigns each strictly lower entry of -B to V or V*.
class LowerPartition {
public:
    static LowerPartition all_to_v() { return LowerPartition(LowerPartitionKind::AllToV); }
    static LowerPartition alternate_rows() {
        return LowerPartition(LowerPartitionKind::AlternateRows);
    }
    static LowerPartition column_halves() {
        return LowerPartition(LowerPartitionKind::ColumnHalves);
    }
    // Entries listed in the mask go to V, the rest to V*.
    static LowerPartition custom(std::set<std::pair<index_t, index_t>> mask);

    LowerPartitionKind kind() const { return kind_; }
    bool assigns_to_v(index_t i, index_t j, index_t n) const;

private:
    explicit LowerPartition(LowerPartitionKind k) : kind_(k) {}
    LowerPartitionKind kind_ = LowerPartitionKind::AllToV;
    std::set<std::pair<index_t, index_t>> mask_;
};

// B = D - V - V* - U with D = diag(B), V/V* nonoverlapping strictly lower,
// U the zero-diagonal remainder. Reconstruction is bitwise by construction.
struct TwoStageSplit {
    SparseMatrix D;
    SparseMatrix V;
    SparseMatrix V_star;
    SparseMatrix U;
    SparseMatrix B;
};

TwoStageSplit two_stage_decompose(const SparseMatrix& b, const LowerPartition& partition);

// Relaxation parameters, uniform across splittings or one pair per splitting.
// Each pair satisfies alpha, beta >= 0 and alpha + beta > 0.
class TorParameters {
public:
    enum class Mode { Uniform, PerSplitting };

    static TorParameters uniform(double alpha, double beta);
    static TorParameters per_splitting(std::vector<double> alphas, std::vector<double> betas);

    Mode mode() const { return mode_; }
    size_t size() const { return alphas_.size(); }
    double alpha_for(size_t l) const { return alphas_[mode_ == Mode::Uniform ? 0 : l]; }
    double beta_for(size_t l) const { return betas_[mode_ == Mode::Uniform ? 0 : l]; }

    bool operator==(const TorParameters& o) const {
        return mode_ == o.mode_ && alphas_ == o.alphas_ && betas_ == o.betas_;
    }

private:
    TorParameters() = default;
    Mode mode_ = Mode::Uniform;
    std::vector<double> alphas_;
    std::vector<double> betas_;
};

// M = (2D - alpha V - beta V*)/(alpha+beta), N = M - B computed from the stored
// entries. M is lower triangular with diagonal 2 d_ii/(alpha+beta). Entries are
// paired so M - N reproduces B bitwise whenever alpha + beta >= 1.
std::pair<SparseMatrix, SparseMatrix> tor_matrices(const TwoStageSplit& split, double alpha,
                                                   double beta);

enum class SplittingStrategy { BlockJacobi, BlockOverlap, GlobalCopies };

// p splittings of A. Invariants checked on construction: B_l - C_l = A bitwise,
// weights in [0,1] with sum_l (E_l)_ii = 1 within 1e-15 per index.
struct MultiSplitting {
    index_t p = 0;
    std::vector<TwoStageSplit> splits;  // decompositions of each B_l
    std::vector<SparseMatrix> C;        // C_l = B_l - A
    std::vector<DenseVector> E;         // diagonal weights

    index_t dim() const { return C.empty() ? 0 : C.front().rows(); }
    void validate(const SparseMatrix& a) const;
};

MultiSplitting build_multisplitting(const SparseMatrix& a, index_t p, SplittingStrategy strategy,
                                    const LowerPartition& partition = LowerPartition::all_to_v(),
                                    index_t overlap = 0);

}  // namespace mstor
