#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace gradiometer;
using testutil::E;

namespace {

Chart chart2() { return Chart({"x1", "x2"}, {{-1.0, 1.0}, {-1.0, 1.0}}); }

ControlSystem euclidean_toy() {
    Chart c = chart2();
    std::vector<VectorField> inputs{VectorField::coordinate(c, 0),
                                    VectorField::coordinate(c, 1)};
    return ControlSystem(c, VectorField::zero(c), inputs, {E(c, "x1"), E(c, "x2")});
}

ControlSystem single_input_toy() {
    Chart c = chart2();
    return ControlSystem(c, VectorField::zero(c), {VectorField::coordinate(c, 0)},
                         {E(c, "x1")});
}

} // namespace

TEST_CASE("prolonged system structure") {
    Chart c = testutil::chart4();
    ControlSystem S = testutil::example_system(c);
    LiftedSystem P = prolong(S);
    CHECK(P.kind == LiftKind::Prolonged);
    CHECK(P.chart.dim() == 8);
    CHECK(P.inputs.size() == 4);
    CHECK(P.outputs.size() == 4);
    // first m outputs are the vertical lifts of the base outputs
    std::vector<double> p{0.1, 0.2, 0.3, 0.4, 1.0, 2.0, 3.0, 4.0};
    CHECK(P.outputs[0].evaluate(p) == doctest::Approx(0.1));
    CHECK(P.outputs[1].evaluate(p) == doctest::Approx(0.2 + 0.3 + 0.4));
    // complete-lift outputs are fiber linear
    CHECK(P.outputs[2].evaluate(p) == doctest::Approx(1.0));
    CHECK(P.outputs[3].evaluate(p) == doctest::Approx(2.0 + 3.0 + 4.0));
    // drift of a zero-drift system has zero complete lift
    for (int a = 0; a < 8; ++a)
        CHECK(testutil::max_residual(P.drift.components[a], Expression(0.0), P.chart, 8) <
              1e-12);
}

TEST_CASE("gradient extension structure and torsion requirement") {
    Chart c = testutil::chart4();
    ControlSystem S = testutil::example_system(c);
    Connection C = christoffel_from_metric(testutil::metric_g1(c));
    LiftedSystem Ext = gradient_extension(S, C);
    CHECK(Ext.kind == LiftKind::Extension);
    CHECK(Ext.chart.dim() == 8);
    CHECK(Ext.inputs.size() == 4);
    CHECK(Ext.outputs.size() == 4);

    Connection torsionful = Connection::flat(c);
    torsionful.symbols[0][0][1] = E(c, "x1");
    CHECK_THROWS_AS(gradient_extension(S, torsionful), std::invalid_argument);
}

TEST_CASE("observation space members and deduplication") {
    ControlSystem S = euclidean_toy();
    FunctionFamily H = observation_space(S, 2);
    // gradients of coordinates: every Lie-derivative word collapses to the
    // constants 0 and 1, which join the two outputs exactly once each
    CHECK(H.members.size() == 4);
    RankReport rep = rank_of_differentials(H, 2);
    CHECK(rep.full);
}

TEST_CASE("numeric rank thresholds") {
    Eigen::MatrixXd A(3, 3);
    A << 1, 0, 0, 0, 1, 0, 0, 0, 1e-12;
    CHECK(numeric_rank(A) == 2);
    A(2, 2) = 1.0;
    CHECK(numeric_rank(A) == 3);
    CHECK(numeric_rank(Eigen::MatrixXd::Zero(3, 3)) == 0);
}

TEST_CASE("observability ranks") {
    Chart c = testutil::chart4();
    ControlSystem S = testutil::example_system(c);
    RankReport rep = observability_rank(S, 2);
    CHECK(rep.full);
    CHECK(rep.uniform);
    for (int r : rep.rank_at_sample) CHECK(r == 4);

    RankReport toy = observability_rank(single_input_toy(), 3);
    CHECK_FALSE(toy.full);
    for (int r : toy.rank_at_sample) CHECK(r == 1);
}

TEST_CASE("symmetric product closure reaches full rank on the example") {
    Chart c = testutil::chart4();
    ControlSystem S = testutil::example_system(c);
    Connection C = christoffel_from_metric(testutil::metric_g1(c));
    S0Family s0 = s0_closure(S, C, 2);
    CHECK(s0.full_rank);
    CHECK(s0.uniform_rank);
    CHECK(s0.basis.size() == 4);
    // basis members carry their paired observation functions
    for (int idx : s0.basis) {
        const S0Member& m = s0.members[idx];
        CHECK(m.word.size() <= 2);
        CHECK_FALSE(m.paired_fn.str().empty());
    }

    S0Family toy = s0_closure(single_input_toy(), Connection::flat(chart2()), 3);
    CHECK_FALSE(toy.full_rank);
}

TEST_CASE("prolonged observation space separates points of TM") {
    Chart c = testutil::chart4();
    ControlSystem S = testutil::example_system(c);
    FunctionFamily Hp = prolonged_observation_space(S, 2);
    RankReport rep = rank_of_differentials(Hp, 8);
    CHECK(rep.full);
}

TEST_CASE("extension observation space classes") {
    Chart c = testutil::chart4();
    ControlSystem S = testutil::example_system(c);
    Connection C = christoffel_from_metric(testutil::metric_g1(c));
    FunctionFamily He = extension_observation_space(S, C, 2);
    CHECK_FALSE(He.members.empty());
    Chart tsm = cotangent_chart(c);
    // every member is fiber linear or fiber constant
    for (const auto& m : He.members) {
        std::vector<double> p{0.1, -0.2, 0.3, 0.4, 0.5, 1.0, -0.5, 2.0};
        std::vector<double> p0 = p, p2 = p;
        for (int a = 4; a < 8; ++a) {
            p0[a] = 0.0;
            p2[a] *= 2.0;
        }
        double f0 = m.fn.evaluate(p0);
        double f1 = m.fn.evaluate(p);
        double f2 = m.fn.evaluate(p2);
        CHECK(f2 - f0 == doctest::Approx(2.0 * (f1 - f0)).epsilon(1e-9));
    }
    RankReport rep = rank_of_differentials(He, 8);
    CHECK(rep.full);
}
