#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace gradiometer;
using testutil::E;

namespace {

Chart chart2() { return Chart({"x1", "x2"}, {{-1.0, 1.0}, {-1.0, 1.0}}); }

// max over samples and indices of d_c G_ab - Gamma^d_ca G_db - Gamma^d_cb G_ad
double metric_compat_residual(const Metric& G, const Connection& C, int samples = 32) {
    const int n = G.chart.dim();
    double worst = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                Expression r = differentiate(G.components[a][b], c);
                for (int d = 0; d < n; ++d)
                    r = r - C.symbols[d][c][a] * G.components[d][b] -
                        C.symbols[d][c][b] * G.components[a][d];
                worst = std::max(worst,
                                 testutil::max_residual(simplify(r), Expression(0.0), G.chart,
                                                        samples));
            }
    return worst;
}

} // namespace

TEST_CASE("symbolic determinant and inverse") {
    Chart c = testutil::chart4();
    Metric G1 = testutil::metric_g1(c);
    Expression det = simplify(symbolic_det(G1.components));
    CHECK(testutil::max_residual(det, E(c, "exp(-x1 - x3 - x4)"), c) < 1e-12);

    const ExprMatrix& inv = G1.inverse();
    for (const auto& p : c.sample_points(16, 5)) {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k)
                    s += inv[i][k].evaluate(p) * G1.components[k][j].evaluate(p);
                CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
            }
    }
    CHECK_THROWS(symbolic_inverse(
        ExprMatrix(7, std::vector<Expression>(7, Expression(1.0)))));
}

TEST_CASE("metric checks catch asymmetry and degeneracy") {
    Chart c = chart2();
    CHECK(check_metric(Metric::euclidean(c)).symmetric);
    CHECK(check_metric(Metric::euclidean(c)).nondegenerate);

    ExprMatrix bad(2, std::vector<Expression>(2, Expression(0.0)));
    bad[0][0] = E(c, "1");
    bad[0][1] = E(c, "x1");
    bad[1][0] = E(c, "0");
    bad[1][1] = E(c, "1");
    CHECK_FALSE(check_metric(Metric(c, bad)).symmetric);

    ExprMatrix deg(2, std::vector<Expression>(2, Expression(0.0)));
    deg[0][0] = E(c, "x1"); // vanishes inside the box
    deg[1][1] = E(c, "1");
    MetricCheck mc = check_metric(Metric(c, deg));
    CHECK_FALSE(mc.nondegenerate);
    CHECK_FALSE(mc.witness.empty());
}

TEST_CASE("Christoffel symbols of the example metric") {
    Chart c = testutil::chart4();
    Connection C = christoffel_from_metric(testutil::metric_g1(c));
    // Gamma^1_33 = (1/2) e^{-x1}
    CHECK(testutil::max_residual(C.symbols[0][2][2], E(c, "exp(-x1)/2"), c) < 1e-12);
    std::vector<double> origin(4, 0.0);
    CHECK(C.symbols[0][2][2].evaluate(origin) == doctest::Approx(0.5));
    // Gamma^3_13 = Gamma^3_31 = -1/2
    CHECK(testutil::max_residual(C.symbols[2][0][2], E(c, "-1/2"), c) < 1e-12);
    CHECK(C.is_torsion_free());

    Connection flat_conn = christoffel_from_metric(Metric::euclidean(chart2()));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int d = 0; d < 2; ++d)
                CHECK(flat_conn.symbols[a][b][d].is_constant(0.0));
}

TEST_CASE("Levi-Civita connection is metric compatible and torsion free") {
    Chart c = testutil::chart4();
    for (const Metric& G : {Metric::euclidean(c), testutil::metric_g1(c),
                            testutil::metric_g2(c)}) {
        Connection C = christoffel_from_metric(G);
        CHECK(C.is_torsion_free());
        CHECK(metric_compat_residual(G, C) < 1e-8);
        detail::SplitMix rng(3);
        VectorField X = testutil::random_field(c, rng);
        VectorField Y = testutil::random_field(c, rng);
        VectorField T = torsion(C, X, Y);
        for (int a = 0; a < 4; ++a)
            CHECK(testutil::max_residual(T.components[a], Expression(0.0), c) < 1e-8);
    }
}

TEST_CASE("Lie bracket identities") {
    Chart c = chart2();
    VectorField d1 = VectorField::coordinate(c, 0);
    VectorField x1d2(c, {E(c, "0"), E(c, "x1")});
    VectorField br = lie_bracket(d1, x1d2);
    CHECK(testutil::max_residual(br.components[0], Expression(0.0), c) < 1e-12);
    CHECK(testutil::max_residual(br.components[1], Expression(1.0), c) < 1e-12);

    detail::SplitMix rng(17);
    VectorField X = testutil::random_field(c, rng);
    VectorField Y = testutil::random_field(c, rng);
    VectorField Z = testutil::random_field(c, rng);
    // Jacobi identity
    VectorField j1 = lie_bracket(X, lie_bracket(Y, Z));
    VectorField j2 = lie_bracket(Y, lie_bracket(Z, X));
    VectorField j3 = lie_bracket(Z, lie_bracket(X, Y));
    for (int a = 0; a < 2; ++a) {
        Expression s = simplify(j1.components[a] + j2.components[a] + j3.components[a]);
        CHECK(testutil::max_residual(s, Expression(0.0), c) < 1e-8);
    }
    // antisymmetry
    VectorField ba = lie_bracket(X, Y);
    VectorField bb = lie_bracket(Y, X);
    for (int a = 0; a < 2; ++a)
        CHECK(testutil::max_residual(simplify(ba.components[a] + bb.components[a]),
                                     Expression(0.0), c) < 1e-10);
}

TEST_CASE("covariant derivative and symmetric product") {
    Chart c = chart2();
    Connection flat_conn = Connection::flat(c);
    VectorField X(c, {E(c, "x2"), E(c, "1")});
    VectorField Y(c, {E(c, "x1*x2"), E(c, "x1")});
    VectorField DXY = covariant_derivative(flat_conn, X, Y);
    // flat case is the plain directional derivative
    CHECK(testutil::max_residual(DXY.components[0], E(c, "x2^2 + x1"), c) < 1e-10);
    CHECK(testutil::max_residual(DXY.components[1], E(c, "x2"), c) < 1e-10);

    Chart c4 = testutil::chart4();
    Connection C = christoffel_from_metric(testutil::metric_g1(c4));
    detail::SplitMix rng(29);
    VectorField A = testutil::random_field(c4, rng);
    VectorField B = testutil::random_field(c4, rng);
    VectorField ab = symmetric_product(C, A, B);
    VectorField ba = symmetric_product(C, B, A);
    for (int a = 0; a < 4; ++a)
        CHECK(testutil::max_residual(ab.components[a], ba.components[a], c4) < 1e-10);
    // symmetric product minus the bracket is twice nabla_B A
    VectorField br = lie_bracket(A, B);
    VectorField dba = covariant_derivative(C, B, A);
    for (int a = 0; a < 4; ++a) {
        Expression lhs = simplify(ab.components[a] - br.components[a]);
        Expression rhs = simplify(Expression(2.0) * dba.components[a]);
        CHECK(testutil::max_residual(lhs, rhs, c4) < 1e-8);
    }
}

TEST_CASE("musical isomorphisms and gradients") {
    Chart c = testutil::chart4();
    Metric G1 = testutil::metric_g1(c);
    Metric G2 = testutil::metric_g2(c);

    VectorField grad1 = gradient(G1, E(c, "x1"));
    CHECK(testutil::max_residual(grad1.components[0], Expression(1.0), c) < 1e-12);
    for (int a = 1; a < 4; ++a)
        CHECK(testutil::max_residual(grad1.components[a], Expression(0.0), c) < 1e-12);

    std::vector<Expression> expected{E(c, "0"), E(c, "exp(x4)"), E(c, "exp(x1)"),
                                     E(c, "exp(x3)")};
    VectorField grad2a = gradient(G1, E(c, "x2 + x3 + x4"));
    VectorField grad2b = gradient(G2, E(c, "x2 + x3 + x4"));
    for (int a = 0; a < 4; ++a) {
        CHECK(testutil::max_residual(grad2a.components[a], expected[a], c) < 1e-10);
        CHECK(testutil::max_residual(grad2b.components[a], expected[a], c) < 1e-10);
    }

    // flat then sharp recovers the field
    detail::SplitMix rng(31);
    VectorField X = testutil::random_field(c, rng);
    VectorField back = sharp(G1, flat(G1, X));
    for (int a = 0; a < 4; ++a)
        CHECK(testutil::max_residual(back.components[a], X.components[a], c) < 1e-8);
}

TEST_CASE("Beltrami bracket is symmetric and gradients are a homomorphism") {
    Chart c = testutil::chart4();
    Metric G1 = testutil::metric_g1(c);
    detail::SplitMix rng(37);
    for (int trial = 0; trial < 5; ++trial) {
        Expression f = testutil::random_fn(c, rng);
        Expression g = testutil::random_fn(c, rng);
        CHECK(testutil::max_residual(beltrami(G1, f, g), beltrami(G1, g, f), c) < 1e-10);
        // grad <f,g> = <grad f : grad g>
        VectorField lhs = gradient(G1, beltrami(G1, f, g));
        VectorField rhs = symmetric_product(christoffel_from_metric(G1), gradient(G1, f),
                                            gradient(G1, g));
        for (int a = 0; a < 4; ++a)
            CHECK(testutil::max_residual(lhs.components[a], rhs.components[a], c) < 1e-8);
    }
}

TEST_CASE("closedness of one-forms") {
    Chart c = chart2();
    OneForm closed(c, {E(c, "2*x1*x2"), E(c, "x1^2")}); // d(x1^2 x2)
    CHECK(is_closed(closed).closed);

    OneForm open_form(c, {E(c, "x2"), E(c, "0")});
    ClosednessCheck chk = is_closed(open_form);
    CHECK_FALSE(chk.closed);
    CHECK(chk.max_residual == doctest::Approx(1.0));
    CHECK_FALSE(chk.witness.empty());
}
