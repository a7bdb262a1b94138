#pragma once

// Lift calculus between the base chart and the induced tangent / cotangent
// charts: complete and vertical lifts, momentum functions, the Riemannian
// extension of a torsion-free connection, and cotangent gradient fields.

#include "gradiometer/geometry.hpp"

namespace gradiometer {

// Induced 2n-chart (x^a, v^a). Base coordinates keep their indices, so base
// expressions evaluate unchanged on 2n-points.
inline Chart tangent_chart(const Chart& base, const std::string& fiber_prefix = "v_") {
    std::vector<std::string> names = base.names();
    std::vector<Interval> box = base.box();
    for (int a = 0; a < base.dim(); ++a) {
        names.push_back(fiber_prefix + base.name(a));
        box.push_back(Interval{-1.0, 1.0});
    }
    return Chart(std::move(names), std::move(box));
}

inline Chart cotangent_chart(const Chart& base) { return tangent_chart(base, "p_"); }

inline Expression fiber_coordinate(const Chart& chart2n, int a) {
    const int n = chart2n.dim() / 2;
    return Expression::variable(chart2n, n + a);
}

// V^c(x,v) = dV/dx^a v^a
inline Expression complete_lift_fn(const Chart& base, const Chart& chart2n, const Expression& V) {
    std::vector<Expression> terms;
    for (int a = 0; a < base.dim(); ++a)
        terms.push_back(differentiate(V, a) * fiber_coordinate(chart2n, a));
    return simplify(Expression::sum(std::move(terms)));
}

// V^v = V o projection; identical expression reinterpreted on the 2n-chart.
inline Expression vertical_lift_fn(const Expression& V) { return V; }

// X^c = X^a d/dx^a + (dX^a/dx^b) v^b d/dv^a
inline VectorField complete_lift_vf(const VectorField& X, const Chart& chart2n) {
    const int n = X.chart.dim();
    std::vector<Expression> comps(2 * n, Expression(0.0));
    for (int a = 0; a < n; ++a) {
        comps[a] = X.components[a];
        std::vector<Expression> terms;
        for (int b = 0; b < n; ++b)
            terms.push_back(differentiate(X.components[a], b) * fiber_coordinate(chart2n, b));
        comps[n + a] = simplify(Expression::sum(std::move(terms)));
    }
    return VectorField(chart2n, std::move(comps));
}

// X^v = X^a d/dv^a
inline VectorField vertical_lift_vf(const VectorField& X, const Chart& chart2n) {
    const int n = X.chart.dim();
    std::vector<Expression> comps(2 * n, Expression(0.0));
    for (int a = 0; a < n; ++a) comps[n + a] = X.components[a];
    return VectorField(chart2n, std::move(comps));
}

// Complete lift to the cotangent chart:
//   X^c = X^a d/dx^a - p_b (dX^b/dx^a) d/dp_a
inline VectorField cotangent_complete_lift_vf(const VectorField& X, const Chart& cochart) {
    const int n = X.chart.dim();
    std::vector<Expression> comps(2 * n, Expression(0.0));
    for (int a = 0; a < n; ++a) comps[a] = X.components[a];
    for (int a = 0; a < n; ++a) {
        std::vector<Expression> terms;
        for (int b = 0; b < n; ++b)
            terms.push_back(-(fiber_coordinate(cochart, b) *
                              differentiate(X.components[b], a)));
        comps[n + a] = simplify(Expression::sum(std::move(terms)));
    }
    return VectorField(cochart, std::move(comps));
}

// V^X(x,p) = p_a X^a(x)
inline Expression momentum_fn(const VectorField& X, const Chart& cochart) {
    std::vector<Expression> terms;
    for (int a = 0; a < X.chart.dim(); ++a)
        terms.push_back(fiber_coordinate(cochart, a) * X.components[a]);
    return simplify(Expression::sum(std::move(terms)));
}

// Riemannian extension of a torsion-free connection: metric on T*M with
// block components [[-2 p_c Gamma^c_{ab}, I], [I, 0]].
inline Metric riemannian_extension(const Connection& C, const Chart& cochart) {
    const int n = C.chart.dim();
    ExprMatrix comps(2 * n, std::vector<Expression>(2 * n, Expression(0.0)));
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            std::vector<Expression> terms;
            for (int c = 0; c < n; ++c)
                terms.push_back(Expression(-2.0) * fiber_coordinate(cochart, c) *
                                C.symbols[c][a][b]);
            comps[a][b] = simplify(Expression::sum(std::move(terms)));
        }
        comps[a][n + a] = Expression(1.0);
        comps[n + a][a] = Expression(1.0);
    }
    return Metric(cochart, std::move(comps));
}

inline Metric riemannian_extension(const Connection& C) {
    return riemannian_extension(C, cotangent_chart(C.chart));
}

// Functions on T*M carry a provenance tag: the cotangent gradient formulas
// only cover momentum functions V^X and vertical lifts f^v.
struct CotangentFunction {
    enum class Kind { Momentum, Vertical };
    Kind kind;
    VectorField field;    // Momentum: the base field X
    Expression potential; // Vertical: the base function V

    static CotangentFunction momentum(VectorField X) {
        return CotangentFunction{Kind::Momentum, std::move(X), Expression(0.0)};
    }
    static CotangentFunction vertical(const Chart& base, Expression V) {
        return CotangentFunction{Kind::Vertical, VectorField::zero(base), std::move(V)};
    }

    Expression expr(const Chart& cochart) const {
        return kind == Kind::Momentum ? momentum_fn(field, cochart) : potential;
    }
};

// grad V^X = X^a d/dx^a + p_a (dX^a/dx^b + 2 Gamma^a_{bc} X^c) d/dp_b
// grad V^v = (dV/dx^a) d/dp_a
inline VectorField cotangent_gradient(const Connection& C, const CotangentFunction& f,
                                      const Chart& cochart) {
    const int n = C.chart.dim();
    std::vector<Expression> comps(2 * n, Expression(0.0));
    if (f.kind == CotangentFunction::Kind::Momentum) {
        const VectorField& X = f.field;
        for (int a = 0; a < n; ++a) comps[a] = X.components[a];
        for (int b = 0; b < n; ++b) {
            std::vector<Expression> terms;
            for (int a = 0; a < n; ++a) {
                Expression bracket = differentiate(X.components[a], b);
                for (int c = 0; c < n; ++c)
                    bracket = bracket + Expression(2.0) * C.symbols[a][b][c] * X.components[c];
                terms.push_back(fiber_coordinate(cochart, a) * bracket);
            }
            comps[n + b] = simplify(Expression::sum(std::move(terms)));
        }
    } else {
        for (int a = 0; a < n; ++a) comps[n + a] = differentiate(f.potential, a);
    }
    return VectorField(cochart, std::move(comps));
}

inline VectorField geodesic_spray(const Connection& C) {
    const Chart tm = tangent_chart(C.chart);
    const int n = C.chart.dim();
    std::vector<Expression> comps(2 * n, Expression(0.0));
    for (int a = 0; a < n; ++a) {
        comps[a] = fiber_coordinate(tm, a);
        std::vector<Expression> terms;
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                terms.push_back(-(C.symbols[a][b][c] * fiber_coordinate(tm, b) *
                                  fiber_coordinate(tm, c)));
        comps[n + a] = simplify(Expression::sum(std::move(terms)));
    }
    return VectorField(tm, std::move(comps));
}

} // namespace gradiometer
