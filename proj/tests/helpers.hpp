#pragma once

// Shared builders for the test suites: the four-dimensional example pair of
// metrics, the two-input system whose inputs are their shared gradients,
// and seeded random fields and functions for identity sweeps.

#include "gradiometer/realization.hpp"

namespace testutil {

using namespace gradiometer;

inline Chart chart4() {
    return Chart({"x1", "x2", "x3", "x4"}, std::vector<Interval>(4, {-0.5, 0.5}));
}

inline Expression E(const Chart& c, const std::string& s) { return parse_expr(s, c); }

// diag(1, e^{-x4}, e^{-x1}, e^{-x3})
inline Metric metric_g1(const Chart& c) {
    ExprMatrix m(4, std::vector<Expression>(4, Expression(0.0)));
    m[0][0] = E(c, "1");
    m[1][1] = E(c, "exp(-x4)");
    m[2][2] = E(c, "exp(-x1)");
    m[3][3] = E(c, "exp(-x3)");
    return Metric(c, std::move(m));
}

// same diagonal block in (x1, x2), coupled (x3, x4) block
inline Metric metric_g2(const Chart& c) {
    ExprMatrix m(4, std::vector<Expression>(4, Expression(0.0)));
    m[0][0] = E(c, "1");
    m[1][1] = E(c, "exp(-x4)");
    m[2][2] = E(c, "exp(-x1) + exp(x3)");
    m[3][3] = E(c, "exp(-x3) * (1 + exp(2*x1))");
    m[2][3] = E(c, "-exp(x1)");
    m[3][2] = E(c, "-exp(x1)");
    return Metric(c, std::move(m));
}

// zero drift, inputs grad V1 and grad V2 (identical under both metrics),
// outputs V1 = x1 and V2 = x2 + x3 + x4
inline ControlSystem example_system(const Chart& c) {
    std::vector<VectorField> inputs;
    inputs.emplace_back(c, std::vector<Expression>{E(c, "1"), E(c, "0"), E(c, "0"), E(c, "0")});
    inputs.emplace_back(c, std::vector<Expression>{E(c, "0"), E(c, "exp(x4)"), E(c, "exp(x1)"),
                                                   E(c, "exp(x3)")});
    std::vector<Expression> outputs{E(c, "x1"), E(c, "x2 + x3 + x4")};
    return ControlSystem(c, VectorField::zero(c), std::move(inputs), std::move(outputs));
}

// random degree-2 polynomial in the chart coordinates
inline Expression random_fn(const Chart& c, detail::SplitMix& rng) {
    Expression e = Expression(rng.uniform() - 0.5);
    for (int a = 0; a < c.dim(); ++a) {
        Expression xa = Expression::variable(c, a);
        e = e + Expression(rng.uniform() - 0.5) * xa;
        e = e + Expression(rng.uniform() - 0.5) * xa * xa;
    }
    return simplify(e);
}

inline VectorField random_field(const Chart& c, detail::SplitMix& rng) {
    std::vector<Expression> comps(c.dim());
    for (int a = 0; a < c.dim(); ++a) comps[a] = random_fn(c, rng);
    return VectorField(c, std::move(comps));
}

inline double max_residual(const Expression& lhs, const Expression& rhs, const Chart& c,
                           int samples = 32, std::uint64_t seed = kDefaultSeed) {
    return equivalent_on_samples(lhs, rhs, c, 0.0, samples, seed).max_residual;
}

} // namespace testutil
