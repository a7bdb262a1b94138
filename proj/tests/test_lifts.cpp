#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace gradiometer;
using testutil::E;

namespace {

Expression metric_pairing(const Metric& G, const VectorField& X, const VectorField& Y) {
    const int n = G.chart.dim();
    std::vector<Expression> terms;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            terms.push_back(G.components[a][b] * X.components[a] * Y.components[b]);
    return simplify(Expression::sum(std::move(terms)));
}

} // namespace

TEST_CASE("induced charts double the dimension and keep base indices") {
    Chart c = testutil::chart4();
    Chart tm = tangent_chart(c);
    Chart tsm = cotangent_chart(c);
    CHECK(tm.dim() == 8);
    CHECK(tm.name(4) == "v_x1");
    CHECK(tsm.name(7) == "p_x4");
    // base expressions evaluate unchanged on extended points
    Expression f = E(c, "exp(x1) + x3");
    std::vector<double> p{0.1, 0.2, 0.3, 0.4, 9.0, 9.0, 9.0, 9.0};
    CHECK(f.evaluate(p) ==
          doctest::Approx(f.evaluate(std::vector<double>{0.1, 0.2, 0.3, 0.4})));
}

TEST_CASE("complete and vertical lifts of functions") {
    Chart c = testutil::chart4();
    Chart tm = tangent_chart(c);
    Expression V = E(c, "x1^2 + x2*x3");
    Expression Vc = complete_lift_fn(c, tm, V);
    // V^c(x, v) = dV/dx . v
    std::vector<double> p{0.5, 0.2, -0.3, 0.1, 1.0, -1.0, 2.0, 0.5};
    double expected = 2 * 0.5 * 1.0 + (-0.3) * (-1.0) + 0.2 * 2.0;
    CHECK(Vc.evaluate(p) == doctest::Approx(expected));
    // vertical lift is fiber constant
    Expression Vv = vertical_lift_fn(V);
    std::vector<double> q = p;
    q[4] = 7.0;
    CHECK(Vv.evaluate(p) == doctest::Approx(Vv.evaluate(q)));
}

TEST_CASE("complete lift commutes with the Lie bracket") {
    Chart c = testutil::chart4();
    Chart tm = tangent_chart(c);
    detail::SplitMix rng(41);
    VectorField X = testutil::random_field(c, rng);
    VectorField Y = testutil::random_field(c, rng);
    VectorField lhs = lie_bracket(complete_lift_vf(X, tm), complete_lift_vf(Y, tm));
    VectorField rhs = complete_lift_vf(lie_bracket(X, Y), tm);
    for (int a = 0; a < 8; ++a)
        CHECK(testutil::max_residual(lhs.components[a], rhs.components[a], tm, 32) < 1e-8);
}

TEST_CASE("lift derivation rules") {
    Chart c = testutil::chart4();
    Chart tm = tangent_chart(c);
    detail::SplitMix rng(43);
    VectorField X = testutil::random_field(c, rng);
    Expression f = testutil::random_fn(c, rng);
    // X^c f^v = (X f)^v and X^v f^v = 0 and X^c f^c = (X f)^c
    Expression r1 = lie_derivative(complete_lift_vf(X, tm), vertical_lift_fn(f));
    CHECK(testutil::max_residual(r1, vertical_lift_fn(lie_derivative(X, f)), tm, 32) < 1e-8);
    Expression r2 = lie_derivative(vertical_lift_vf(X, tm), vertical_lift_fn(f));
    CHECK(testutil::max_residual(r2, Expression(0.0), tm, 32) < 1e-12);
    Expression r3 = lie_derivative(complete_lift_vf(X, tm), complete_lift_fn(c, tm, f));
    CHECK(testutil::max_residual(r3, complete_lift_fn(c, tm, lie_derivative(X, f)), tm, 32) <
          1e-8);
    // X^v f^c = (X f)^v
    Expression r4 = lie_derivative(vertical_lift_vf(X, tm), complete_lift_fn(c, tm, f));
    CHECK(testutil::max_residual(r4, vertical_lift_fn(lie_derivative(X, f)), tm, 32) < 1e-8);
}

TEST_CASE("momentum functions are linear in the fiber") {
    Chart c = testutil::chart4();
    Chart tsm = cotangent_chart(c);
    detail::SplitMix rng(47);
    VectorField X = testutil::random_field(c, rng);
    Expression VX = momentum_fn(X, tsm);
    std::vector<double> p{0.1, -0.2, 0.3, 0.0, 0.5, 1.0, -0.5, 2.0};
    std::vector<double> p2 = p;
    for (int a = 4; a < 8; ++a) p2[a] *= 3.0;
    CHECK(VX.evaluate(p2) == doctest::Approx(3.0 * VX.evaluate(p)));
}

TEST_CASE("Riemannian extension defining identity") {
    Chart c = testutil::chart4();
    Chart tsm = cotangent_chart(c);
    Connection C = christoffel_from_metric(testutil::metric_g1(c));
    Metric Gc = riemannian_extension(C, tsm);
    detail::SplitMix rng(53);
    for (int trial = 0; trial < 5; ++trial) {
        VectorField X = testutil::random_field(c, rng);
        VectorField Y = testutil::random_field(c, rng);
        Expression lhs = metric_pairing(Gc, cotangent_complete_lift_vf(X, tsm),
                                        cotangent_complete_lift_vf(Y, tsm));
        Expression rhs = simplify(-momentum_fn(symmetric_product(C, X, Y), tsm));
        CHECK(testutil::max_residual(lhs, rhs, tsm, 32) < 1e-8);
    }
}

TEST_CASE("cotangent gradient identities") {
    Chart c = testutil::chart4();
    Chart tsm = cotangent_chart(c);
    for (const Connection& C :
         {Connection::flat(c), christoffel_from_metric(testutil::metric_g1(c))}) {
        detail::SplitMix rng(59);
        for (int trial = 0; trial < 5; ++trial) {
            VectorField X = testutil::random_field(c, rng);
            VectorField Y = testutil::random_field(c, rng);
            Expression f = testutil::random_fn(c, rng);
            Expression g = testutil::random_fn(c, rng);

            VectorField gradVX = cotangent_gradient(C, CotangentFunction::momentum(X), tsm);
            VectorField gradVY = cotangent_gradient(C, CotangentFunction::momentum(Y), tsm);
            VectorField gradfv =
                cotangent_gradient(C, CotangentFunction::vertical(c, f), tsm);
            VectorField gradgv =
                cotangent_gradient(C, CotangentFunction::vertical(c, g), tsm);

            // (grad V^X)(V^Y) = V^{<X:Y>} = -G^c(X^c, Y^c)
            Expression i1 = lie_derivative(gradVX, momentum_fn(Y, tsm));
            Expression vxy = momentum_fn(symmetric_product(C, X, Y), tsm);
            CHECK(testutil::max_residual(i1, vxy, tsm, 32) < 1e-8);
            Expression pairing = metric_pairing(riemannian_extension(C, tsm),
                                                cotangent_complete_lift_vf(X, tsm),
                                                cotangent_complete_lift_vf(Y, tsm));
            CHECK(testutil::max_residual(simplify(-pairing), vxy, tsm, 32) < 1e-8);

            // (grad V^X)(f^v) = (grad f^v)(V^X) = (X f)^v
            Expression i2a = lie_derivative(gradVX, vertical_lift_fn(f));
            Expression i2b = lie_derivative(gradfv, momentum_fn(X, tsm));
            Expression xf = vertical_lift_fn(lie_derivative(X, f));
            CHECK(testutil::max_residual(i2a, xf, tsm, 32) < 1e-8);
            CHECK(testutil::max_residual(i2b, xf, tsm, 32) < 1e-8);

            // (grad f^v)(g^v) = 0
            Expression i3 = lie_derivative(gradfv, vertical_lift_fn(g));
            CHECK(testutil::max_residual(i3, Expression(0.0), tsm, 32) < 1e-12);
        }
    }
}

TEST_CASE("geodesic spray") {
    Chart c = Chart({"x1", "x2"}, {{-1.0, 1.0}, {-1.0, 1.0}});
    VectorField S = geodesic_spray(Connection::flat(c));
    Chart tm = tangent_chart(c);
    CHECK(testutil::max_residual(S.components[0], fiber_coordinate(tm, 0), tm, 16) < 1e-12);
    CHECK(testutil::max_residual(S.components[2], Expression(0.0), tm, 16) < 1e-12);

    // spray of a metric connection preserves the kinetic energy symbolically
    Chart c4 = testutil::chart4();
    Metric G1 = testutil::metric_g1(c4);
    Connection C = christoffel_from_metric(G1);
    VectorField spray = geodesic_spray(C);
    Chart tm4 = tangent_chart(c4);
    std::vector<Expression> terms;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            terms.push_back(G1.components[a][b] * fiber_coordinate(tm4, a) *
                            fiber_coordinate(tm4, b));
    Expression energy = simplify(Expression::sum(std::move(terms)));
    Expression de = lie_derivative(spray, energy);
    CHECK(testutil::max_residual(de, Expression(0.0), tm4, 32) < 1e-8);
}
