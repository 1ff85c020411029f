#include "mstor/nonlinear.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace mstor {

const char* to_string(Nonlinearity k) {
    switch (k) {
        case Nonlinearity::Sine: return "sine";
        case Nonlinearity::Arctan: return "arctan";
        case Nonlinearity::ExpDecay: return "expdecay";
        case Nonlinearity::Constant: return "const";
    }
    return "?";
}

Nonlinearity nonlinearity_from_string(const std::string& s) {
    if (s == "sine" || s == "sin") return Nonlinearity::Sine;
    if (s == "arctan") return Nonlinearity::Arctan;
    if (s == "expdecay") return Nonlinearity::ExpDecay;
    if (s == "const" || s == "constant") return Nonlinearity::Constant;
    throw ParameterError("unknown nonlinearity '" + s + "'");
}

BoundedMap::BoundedMap(index_t n, Evaluator evaluator, SparseMatrix p, std::string description)
    : n_(n), evaluator_(std::move(evaluator)), p_(std::move(p)),
      description_(std::move(description)) {
    if (n_ < 0) throw DimensionError("map dimension must be nonnegative");
    if (!evaluator_) throw ParameterError("map needs an evaluator");
    if (p_.rows() != n_ || p_.cols() != n_)
        throw DimensionError("bound matrix must be " + std::to_string(n_) + "x" +
                             std::to_string(n_));
    if (!p_.is_nonnegative())
        throw DomainError("bound matrix must be elementwise nonnegative");
}

DenseVector BoundedMap::operator()(const DenseVector& x) const {
    if (static_cast<index_t>(x.size()) != n_)
        throw DimensionError("map expects length " + std::to_string(n_) + ", got " +
                             std::to_string(x.size()));
    DenseVector y = evaluator_(x);
    if (static_cast<index_t>(y.size()) != n_)
        throw DimensionError("map returned length " + std::to_string(y.size()) + ", expected " +
                             std::to_string(n_));
    for (size_t i = 0; i < y.size(); ++i)
        if (!std::isfinite(y[i]))
            throw DomainError("map produced a non-finite value at index " + std::to_string(i));
    return y;
}

namespace {

double scalar_map(Nonlinearity kind, double c, double t) {
    switch (kind) {
        case Nonlinearity::Sine: return std::sin(t);
        case Nonlinearity::Arctan: return std::atan(t);
        case Nonlinearity::ExpDecay: return t < 0.0 ? 1.0 - t : std::exp(-t);
        case Nonlinearity::Constant: return c;
    }
    return 0.0;
}

}  // namespace

BoundedMap make_componentwise_map(Nonlinearity kind, index_t n, double coupling,
                                  double constant_value) {
    if (!(coupling >= 0.0) || !std::isfinite(coupling))
        throw ParameterError("coupling must be finite and nonnegative");
    auto eval = [kind, coupling, constant_value](const DenseVector& x) {
        DenseVector y(x.size());
        for (size_t i = 0; i < x.size(); ++i)
            y[i] = coupling * scalar_map(kind, constant_value, x[i]);
        return y;
    };
    // Every builtin scalar map is declared with Lipschitz constant 1 (not sharp
    // for the constant map). diagonal() drops zeros, hence the explicit zero matrix.
    SparseMatrix p = coupling == 0.0
                         ? SparseMatrix::zeros(n, n)
                         : SparseMatrix::diagonal(DenseVector(static_cast<size_t>(n), coupling));
    std::string desc = std::string(to_string(kind));
    if (kind == Nonlinearity::Constant) desc += "(" + std::to_string(constant_value) + ")";
    desc += " with coupling " + std::to_string(coupling);
    return BoundedMap(n, std::move(eval), std::move(p), std::move(desc));
}

PBoundReport verify_p_bound(const BoundedMap& g, long samples, double radius,
                            std::uint64_t seed) {
    if (samples < 1) throw ParameterError("need at least one sample");
    if (!(radius > 0.0)) throw ParameterError("radius must be positive");
    const size_t n = static_cast<size_t>(g.dim());
    const SparseMatrix& p = g.bound();

    std::mt19937_64 rng(seed);
    // Fixed mapping to [-radius, radius) so results do not depend on the
    // standard library's distribution implementation.
    auto draw = [&rng, radius]() {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return (2.0 * u - 1.0) * radius;
    };

    PBoundReport rep;
    rep.samples = samples;
    rep.worst_margin = -std::numeric_limits<double>::infinity();

    DenseVector x(n), y(n), dxy(n);
    for (long s = 0; s < samples; ++s) {
        for (size_t i = 0; i < n; ++i) x[i] = draw();
        for (size_t i = 0; i < n; ++i) y[i] = draw();
        DenseVector gx = g(x);
        DenseVector gy = g(y);
        for (size_t i = 0; i < n; ++i) dxy[i] = std::abs(x[i] - y[i]);
        DenseVector pb = p.multiply(dxy);
        double sample_worst = -std::numeric_limits<double>::infinity();
        index_t sample_idx = -1;
        for (size_t i = 0; i < n; ++i) {
            const double margin = std::abs(gx[i] - gy[i]) - pb[i] - 1e-12;
            if (margin > sample_worst) {
                sample_worst = margin;
                sample_idx = static_cast<index_t>(i);
            }
        }
        if (sample_worst > 0.0) ++rep.violations;
        if (sample_worst > rep.worst_margin) {
            rep.worst_margin = sample_worst;
            rep.worst_index = sample_idx;
            rep.worst_x = x;
            rep.worst_y = y;
        }
    }
    return rep;
}

WeaklyNonlinearProblem::WeaklyNonlinearProblem(SparseMatrix a, BoundedMap g, std::string name_in,
                                               std::optional<DenseVector> known,
                                               bool generated_in)
    : A(std::move(a)), G(std::move(g)), name(std::move(name_in)),
      known_solution(std::move(known)), generated(generated_in) {
    if (!A.square()) throw DimensionError("problem matrix must be square");
    if (G.dim() != A.rows())
        throw DimensionError("map dimension " + std::to_string(G.dim()) +
                             " does not match matrix dimension " + std::to_string(A.rows()));
    if (G.bound().rows() != A.rows())
        throw DimensionError("bound matrix dimension mismatch");
    if (known_solution) {
        const DenseVector& xs = *known_solution;
        if (static_cast<index_t>(xs.size()) != A.rows())
            throw DimensionError("known solution length mismatch");
        require_finite(xs, "known solution");
        const double r = norm_inf(vec_subtract(A.multiply(xs), G(xs)));
        if (r > 1e-10 * (1.0 + norm_inf(xs)))
            throw DomainError("known solution fails the residual check: ||Ax-G(x)||_inf = " +
                              std::to_string(r));
    }
}

SparseMatrix grid_laplacian(index_t m) {
    if (m < 1) throw ParameterError("grid needs m >= 1");
    const index_t n = m * m;
    const double h = 1.0 / static_cast<double>(m + 1);
    const double inv_h2 = 1.0 / (h * h);
    std::vector<Triplet> t;
    t.reserve(static_cast<size_t>(5 * n));
    for (index_t r = 0; r < m; ++r) {
        for (index_t c = 0; c < m; ++c) {
            const index_t i = r * m + c;
            t.push_back({i, i, 4.0 * inv_h2});
            if (r > 0) t.push_back({i, i - m, -inv_h2});
            if (r + 1 < m) t.push_back({i, i + m, -inv_h2});
            if (c > 0) t.push_back({i, i - 1, -inv_h2});
            if (c + 1 < m) t.push_back({i, i + 1, -inv_h2});
        }
    }
    return SparseMatrix::from_triplets(n, n, std::move(t));
}

double grid_laplacian_min_eigenvalue(index_t m) {
    const double h = 1.0 / static_cast<double>(m + 1);
    const double c = std::cos(M_PI * h);
    return (4.0 - 4.0 * c) / (h * h);
}

WeaklyNonlinearProblem generate_grid_problem(index_t m, Nonlinearity kind, double coupling,
                                             double constant_value) {
    SparseMatrix a = grid_laplacian(m);
    const double lam_min = grid_laplacian_min_eigenvalue(m);
    if (!(coupling < lam_min))
        throw GenerationError("coupling " + std::to_string(coupling) +
                              " breaks the contraction guarantee; the maximal safe coupling for m = " +
                              std::to_string(m) + " is just below " + std::to_string(lam_min));
    BoundedMap g = make_componentwise_map(kind, a.rows(), coupling, constant_value);

    std::optional<DenseVector> known;
    if (kind == Nonlinearity::Sine || kind == Nonlinearity::Arctan ||
        (kind == Nonlinearity::Constant && coupling * constant_value == 0.0))
        known = DenseVector(static_cast<size_t>(a.rows()), 0.0);

    char cbuf[32];
    std::snprintf(cbuf, sizeof(cbuf), "%g", coupling);
    std::string name = "grid" + std::to_string(m) + "x" + std::to_string(m) + "-" +
                       to_string(kind) + "-c" + cbuf;
    WeaklyNonlinearProblem prob(std::move(a), std::move(g), std::move(name), std::move(known),
                                /*generated=*/true);
    prob.recipe = NonlinearityRecipe{kind, coupling, constant_value};
    prob.notes.push_back("rho(<A>^-1 P) <= coupling/lambda_min = " +
                         std::to_string(coupling / lam_min) + " < 1");
    return prob;
}

}  // namespace mstor
