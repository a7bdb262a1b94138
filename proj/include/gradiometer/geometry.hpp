#pragma once

// Coordinate differential geometry: metrics, connections, Christoffel
// symbols, symmetric products, Lie calculus, musical isomorphisms.

#include <functional>

#include "gradiometer/expr.hpp"

namespace gradiometer {

using ExprMatrix = std::vector<std::vector<Expression>>;

struct VectorField {
    Chart chart;
    std::vector<Expression> components;

    VectorField() = default;
    VectorField(Chart c, std::vector<Expression> comps)
        : chart(std::move(c)), components(std::move(comps)) {
        if (static_cast<int>(components.size()) != chart.dim())
            throw std::invalid_argument("vector field: component count != chart dimension");
    }

    static VectorField zero(const Chart& c) {
        return VectorField(c, std::vector<Expression>(c.dim(), Expression(0.0)));
    }
    static VectorField coordinate(const Chart& c, int a) {
        auto v = std::vector<Expression>(c.dim(), Expression(0.0));
        v.at(a) = Expression(1.0);
        return VectorField(c, std::move(v));
    }

    std::vector<double> evaluate(std::span<const double> point) const {
        std::vector<double> out(components.size());
        for (std::size_t i = 0; i < components.size(); ++i)
            out[i] = components[i].evaluate(point);
        return out;
    }
};

struct OneForm {
    Chart chart;
    std::vector<Expression> components;

    OneForm() = default;
    OneForm(Chart c, std::vector<Expression> comps)
        : chart(std::move(c)), components(std::move(comps)) {
        if (static_cast<int>(components.size()) != chart.dim())
            throw std::invalid_argument("one-form: component count != chart dimension");
    }

    std::vector<double> evaluate(std::span<const double> point) const {
        std::vector<double> out(components.size());
        for (std::size_t i = 0; i < components.size(); ++i)
            out[i] = components[i].evaluate(point);
        return out;
    }
};

inline OneForm differential(const Chart& chart, const Expression& f) {
    std::vector<Expression> comps(chart.dim());
    for (int a = 0; a < chart.dim(); ++a) comps[a] = differentiate(f, a);
    return OneForm(chart, std::move(comps));
}

// ---------------------------------------------------------------------------
// Small symbolic linear algebra, enough for cofactor inverses at n <= 6.

namespace detail {

inline Expression det_recursive(const ExprMatrix& m, std::vector<int> rows,
                                std::vector<int> cols) {
    const std::size_t k = rows.size();
    if (k == 1) return m[rows[0]][cols[0]];
    std::vector<Expression> terms;
    std::vector<int> sub_rows(rows.begin() + 1, rows.end());
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<int> sub_cols;
        for (std::size_t t = 0; t < k; ++t)
            if (t != j) sub_cols.push_back(cols[t]);
        Expression minor = det_recursive(m, sub_rows, sub_cols);
        Expression term = m[rows[0]][cols[j]] * minor;
        terms.push_back(j % 2 == 0 ? term : -term);
    }
    return simplify(Expression::sum(std::move(terms)));
}

} // namespace detail

inline Expression symbolic_det(const ExprMatrix& m) {
    const int n = static_cast<int>(m.size());
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    return detail::det_recursive(m, idx, idx);
}

constexpr int kMaxSymbolicInverseDim = 6;

// Cofactor (adjugate) inverse; intended for n <= 6.
inline ExprMatrix symbolic_inverse(const ExprMatrix& m) {
    const int n = static_cast<int>(m.size());
    if (n > kMaxSymbolicInverseDim)
        throw std::invalid_argument("symbolic inverse limited to n <= 6");
    Expression det = symbolic_det(m);
    ExprMatrix inv(n, std::vector<Expression>(n));
    if (n == 1) {
        inv[0][0] = simplify(Expression(1.0) / det);
        return inv;
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            std::vector<int> rows, cols;
            for (int r = 0; r < n; ++r)
                if (r != j) rows.push_back(r);
            for (int c = 0; c < n; ++c)
                if (c != i) cols.push_back(c);
            Expression cof = detail::det_recursive(m, rows, cols);
            if ((i + j) % 2 != 0) cof = -cof;
            inv[i][j] = simplify(cof / det);
        }
    }
    return inv;
}

// ---------------------------------------------------------------------------

struct Metric {
    Chart chart;
    ExprMatrix components; // G_ab

    Metric() = default;
    Metric(Chart c, ExprMatrix comps) : chart(std::move(c)), components(std::move(comps)) {
        const int n = chart.dim();
        if (static_cast<int>(components.size()) != n)
            throw std::invalid_argument("metric: row count != chart dimension");
        for (const auto& row : components)
            if (static_cast<int>(row.size()) != n)
                throw std::invalid_argument("metric: column count != chart dimension");
    }

    static Metric euclidean(const Chart& c) {
        ExprMatrix m(c.dim(), std::vector<Expression>(c.dim(), Expression(0.0)));
        for (int i = 0; i < c.dim(); ++i) m[i][i] = Expression(1.0);
        return Metric(c, std::move(m));
    }

    const ExprMatrix& inverse() const {
        if (inverse_.empty()) inverse_ = symbolic_inverse(components);
        return inverse_;
    }

    std::vector<std::vector<double>> evaluate(std::span<const double> point) const {
        const int n = chart.dim();
        std::vector<std::vector<double>> out(n, std::vector<double>(n));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) out[a][b] = components[a][b].evaluate(point);
        return out;
    }

private:
    mutable ExprMatrix inverse_; // cached cofactor inverse
};

constexpr double kDegeneracyTol = 1e-9;

struct MetricCheck {
    bool symmetric = true;
    bool nondegenerate = true;
    double min_abs_det = 0.0;
    std::vector<double> witness;
};

// Symmetry on samples plus |det| >= tolerance at every sample point.
// Sign of the metric is never inspected; indefinite metrics are admitted.
MetricCheck check_metric(const Metric& G, double tol = 1e-8, int samples = 64,
                         std::uint64_t seed = kDefaultSeed);

struct Connection {
    Chart chart;
    // symbols[a][b][c] = Gamma^a_{bc}
    std::vector<ExprMatrix> symbols;

    Connection() = default;
    Connection(Chart c, std::vector<ExprMatrix> sym)
        : chart(std::move(c)), symbols(std::move(sym)) {
        const int n = chart.dim();
        if (static_cast<int>(symbols.size()) != n)
            throw std::invalid_argument("connection: symbol count != chart dimension");
    }

    static Connection flat(const Chart& c) {
        return Connection(
            c, std::vector<ExprMatrix>(
                   c.dim(), ExprMatrix(c.dim(), std::vector<Expression>(c.dim(), Expression(0.0)))));
    }

    bool is_torsion_free(double tol = 1e-8, int samples = 64,
                         std::uint64_t seed = kDefaultSeed) const {
        const int n = chart.dim();
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = b + 1; c < n; ++c)
                    if (!equivalent_on_samples(symbols[a][b][c], symbols[a][c][b], chart, tol,
                                               samples, seed)
                             .ok)
                        return false;
        return true;
    }
};

// Levi-Civita connection of G:
//   Gamma^a_{bc} = 1/2 G^{ad} (d_c G_db + d_b G_dc - d_d G_bc)
inline Connection christoffel_from_metric(const Metric& G) {
    const int n = G.chart.dim();
    const ExprMatrix& inv = G.inverse();
    std::vector<ExprMatrix> sym(n, ExprMatrix(n, std::vector<Expression>(n)));
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            for (int c = 0; c < n; ++c) {
                std::vector<Expression> terms;
                for (int d = 0; d < n; ++d) {
                    Expression bracket = differentiate(G.components[d][b], c) +
                                         differentiate(G.components[d][c], b) -
                                         differentiate(G.components[b][c], d);
                    terms.push_back(inv[a][d] * bracket);
                }
                sym[a][b][c] = simplify(Expression(0.5) * Expression::sum(std::move(terms)));
            }
        }
    }
    return Connection(G.chart, std::move(sym));
}

inline MetricCheck check_metric(const Metric& G, double tol, int samples, std::uint64_t seed) {
    MetricCheck res;
    const int n = G.chart.dim();
    for (int a = 0; a < n && res.symmetric; ++a)
        for (int b = a + 1; b < n && res.symmetric; ++b)
            res.symmetric = equivalent_on_samples(G.components[a][b], G.components[b][a],
                                                  G.chart, tol, samples, seed)
                                .ok;
    Expression det = symbolic_det(G.components);
    res.min_abs_det = std::numeric_limits<double>::infinity();
    bool pos = false, neg = false;
    for (const auto& p : G.chart.sample_points(samples, seed)) {
        double d = det.evaluate(p);
        if (d > kDegeneracyTol) pos = true;
        if (d < -kDegeneracyTol) neg = true;
        if (std::abs(d) < res.min_abs_det) res.min_abs_det = std::abs(d);
        if (std::abs(d) < kDegeneracyTol && res.nondegenerate) {
            res.nondegenerate = false;
            res.witness = p;
        }
    }
    // a sign change forces a zero of the determinant inside the box
    if (pos && neg && res.nondegenerate) {
        res.nondegenerate = false;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : G.chart.sample_points(samples, seed)) {
            double d = std::abs(det.evaluate(p));
            if (d < best) {
                best = d;
                res.witness = p;
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Lie calculus

inline Expression lie_derivative(const VectorField& X, const Expression& f) {
    std::vector<Expression> terms;
    for (int a = 0; a < X.chart.dim(); ++a) terms.push_back(X.components[a] * differentiate(f, a));
    return simplify(Expression::sum(std::move(terms)));
}

inline VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
    if (!X.chart.same_coordinates(Y.chart))
        throw std::invalid_argument("lie_bracket: charts differ");
    const int n = X.chart.dim();
    std::vector<Expression> comps(n);
    for (int a = 0; a < n; ++a) {
        std::vector<Expression> terms;
        for (int b = 0; b < n; ++b) {
            terms.push_back(X.components[b] * differentiate(Y.components[a], b));
            terms.push_back(-(Y.components[b] * differentiate(X.components[a], b)));
        }
        comps[a] = simplify(Expression::sum(std::move(terms)));
    }
    return VectorField(X.chart, std::move(comps));
}

// (nabla_X Y)^a = X^b d_b Y^a + Gamma^a_{bc} X^b Y^c
inline VectorField covariant_derivative(const Connection& C, const VectorField& X,
                                        const VectorField& Y) {
    if (!C.chart.same_coordinates(X.chart) || !C.chart.same_coordinates(Y.chart))
        throw std::invalid_argument("covariant_derivative: charts differ");
    const int n = C.chart.dim();
    std::vector<Expression> comps(n);
    for (int a = 0; a < n; ++a) {
        std::vector<Expression> terms;
        for (int b = 0; b < n; ++b) {
            terms.push_back(X.components[b] * differentiate(Y.components[a], b));
            for (int c = 0; c < n; ++c)
                terms.push_back(C.symbols[a][b][c] * X.components[b] * Y.components[c]);
        }
        comps[a] = simplify(Expression::sum(std::move(terms)));
    }
    return VectorField(C.chart, std::move(comps));
}

inline VectorField symmetric_product(const Connection& C, const VectorField& X,
                                     const VectorField& Y) {
    VectorField xy = covariant_derivative(C, X, Y);
    VectorField yx = covariant_derivative(C, Y, X);
    std::vector<Expression> comps(C.chart.dim());
    for (int a = 0; a < C.chart.dim(); ++a)
        comps[a] = simplify(xy.components[a] + yx.components[a]);
    return VectorField(C.chart, std::move(comps));
}

inline VectorField torsion(const Connection& C, const VectorField& X, const VectorField& Y) {
    VectorField xy = covariant_derivative(C, X, Y);
    VectorField yx = covariant_derivative(C, Y, X);
    VectorField br = lie_bracket(X, Y);
    std::vector<Expression> comps(C.chart.dim());
    for (int a = 0; a < C.chart.dim(); ++a)
        comps[a] = simplify(xy.components[a] - yx.components[a] - br.components[a]);
    return VectorField(C.chart, std::move(comps));
}

// ---------------------------------------------------------------------------
// Musical isomorphisms and gradients

inline OneForm flat(const Metric& G, const VectorField& X) {
    const int n = G.chart.dim();
    std::vector<Expression> comps(n);
    for (int a = 0; a < n; ++a) {
        std::vector<Expression> terms;
        for (int b = 0; b < n; ++b) terms.push_back(G.components[a][b] * X.components[b]);
        comps[a] = simplify(Expression::sum(std::move(terms)));
    }
    return OneForm(G.chart, std::move(comps));
}

inline VectorField sharp(const Metric& G, const OneForm& w) {
    const int n = G.chart.dim();
    const ExprMatrix& inv = G.inverse();
    std::vector<Expression> comps(n);
    for (int a = 0; a < n; ++a) {
        std::vector<Expression> terms;
        for (int b = 0; b < n; ++b) terms.push_back(inv[a][b] * w.components[b]);
        comps[a] = simplify(Expression::sum(std::move(terms)));
    }
    return VectorField(G.chart, std::move(comps));
}

inline VectorField gradient(const Metric& G, const Expression& V) {
    return sharp(G, differential(G.chart, V));
}

// Beltrami bracket <f,g>_G = d_a f G^{ab} d_b g
inline Expression beltrami(const Metric& G, const Expression& f, const Expression& g) {
    const int n = G.chart.dim();
    const ExprMatrix& inv = G.inverse();
    std::vector<Expression> terms;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            terms.push_back(differentiate(f, a) * inv[a][b] * differentiate(g, b));
    return simplify(Expression::sum(std::move(terms)));
}

struct ClosednessCheck {
    bool closed = true;
    double max_residual = 0.0;
    std::vector<double> witness;
};

// d_b w_a - d_a w_b == 0 on the sample set.
inline ClosednessCheck is_closed(const OneForm& w, double tol = 1e-8, int samples = 64,
                                 std::uint64_t seed = kDefaultSeed) {
    ClosednessCheck res;
    const int n = w.chart.dim();
    std::vector<Expression> curls;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            curls.push_back(
                simplify(differentiate(w.components[a], b) - differentiate(w.components[b], a)));
    for (const auto& p : w.chart.sample_points(samples, seed)) {
        for (const auto& c : curls) {
            double r = std::abs(c.evaluate(p));
            if (r > res.max_residual) res.max_residual = r;
            if (r > tol && res.closed) {
                res.closed = false;
                res.witness = p;
            }
        }
    }
    return res;
}

// Geodesic spray on the induced (x, v) chart:
//   S = v^a d/dx^a - Gamma^a_{bc} v^b v^c d/dv^a
VectorField geodesic_spray(const Connection& C);

} // namespace gradiometer
