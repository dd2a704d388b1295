#include <doctest.h>

#include <cmath>

#include "abfield/electron.hpp"

using namespace abfield;

namespace {
const PhysicalConstants kC = PhysicalConstants::cgs();
}

TEST_SUITE("electron") {

TEST_CASE("static closed forms at a point") {
    const double q = -kC.e_charge;
    const ElectronState st(q, {1.0, 0.0, 0.0}, {0.0, 1e8, 0.0}, kC);

    const Vec3 e = electron_e_field(st, {1.0, 0.0, 2.0}, kC);
    // separation (0, 0, 2): E = q zhat / 4
    CHECK(e.x == 0.0);
    CHECK(e.y == 0.0);
    CHECK(e.z == doctest::Approx(q / 4.0).epsilon(1e-15));

    const Vec3 b = electron_b_field(st, {1.0, 0.0, 2.0}, kC);
    // B = (v/c) x E: yhat x zhat = xhat
    CHECK(b.x == doctest::Approx((1e8 / kC.c) * q / 4.0).epsilon(1e-15));
    CHECK(b.y == 0.0);
    CHECK(b.z == 0.0);

    const Vec3 a = electron_a_potential(st, {1.0, 0.0, 2.0}, kC);
    CHECK(a.y == doctest::Approx(q * 1e8 / (kC.c * 2.0)).epsilon(1e-15));
    CHECK(a.x == 0.0);
}

TEST_CASE("boosted field concentrates transverse by gamma and thins longitudinal") {
    const double beta = 0.1;
    const double gamma = 1.0 / std::sqrt(1.0 - beta * beta);
    const ElectronState st(-kC.e_charge, {0.0, 0.0, 0.0}, {beta * kC.c, 0.0, 0.0}, kC);

    const Vec3 e_qs_t = electron_e_field(st, {0.0, 2.0, 0.0}, kC, ElectronFieldModel::QuasiStatic);
    const Vec3 e_b_t =
        electron_e_field(st, {0.0, 2.0, 0.0}, kC, ElectronFieldModel::BoostedCoulomb);
    CHECK(e_b_t.y == doctest::Approx(gamma * e_qs_t.y).epsilon(1e-13));

    const Vec3 e_qs_l = electron_e_field(st, {2.0, 0.0, 0.0}, kC, ElectronFieldModel::QuasiStatic);
    const Vec3 e_b_l =
        electron_e_field(st, {2.0, 0.0, 0.0}, kC, ElectronFieldModel::BoostedCoulomb);
    CHECK(e_b_l.x == doctest::Approx(e_qs_l.x / (gamma * gamma)).epsilon(1e-13));
}

TEST_CASE("the quasi-static model is adequate at flyby speeds") {
    const double beta = 1e-3;
    const ElectronState st(-kC.e_charge, {0.0, 0.0, 0.0}, {beta * kC.c, 0.0, 0.0}, kC);
    for (const Vec3& r : {Vec3{1.0, 1.0, 0.2}, Vec3{-0.5, 2.0, 1.0}, Vec3{0.1, 0.0, 3.0}}) {
        const Vec3 eq = electron_e_field(st, r, kC, ElectronFieldModel::QuasiStatic);
        const Vec3 eb = electron_e_field(st, r, kC, ElectronFieldModel::BoostedCoulomb);
        CHECK(norm(eq - eb) <= 5e-6 * norm(eq));
    }
}

TEST_CASE("fields mirror under reflection of the configuration") {
    const ElectronState st(-kC.e_charge, {2.0, 0.0, 0.0}, {0.0, 3e7, 0.0}, kC);
    const ElectronState mirrored(-kC.e_charge, {-2.0, 0.0, 0.0}, {0.0, 3e7, 0.0}, kC);
    const Vec3 e1 = electron_e_field(st, {3.0, 1.0, 0.5}, kC);
    const Vec3 e2 = electron_e_field(mirrored, {-3.0, 1.0, 0.5}, kC);
    CHECK(e1.x == -e2.x);
    CHECK(e1.y == e2.y);
    CHECK(e1.z == e2.z);
}

TEST_CASE("disc flux equals the loop circulation of the vector potential") {
    const ElectronState st(-kC.e_charge, {3.0, 0.0, 0.0}, {0.0, 1e8, 0.0}, kC);
    LoopSpec loop;
    loop.center = {0.0, 0.0, 0.8};
    loop.axis = {0.0, 0.0, 1.0};
    loop.radius = 1.0;
    QuadratureSpec spec;
    spec.rel_tol = 1e-8;
    spec.abs_tol = 0.0;
    const double f = electron_flux_through_loop(st, loop, kC, spec);

    // circulation by periodic trapezoid (spectrally accurate for analytic A)
    const int n = 512;
    double circ = 0.0;
    for (int i = 0; i < n; ++i) {
        const double phi = 2.0 * M_PI * i / n;
        const Vec3 p{std::cos(phi), std::sin(phi), 0.8};
        const Vec3 t{-std::sin(phi), std::cos(phi), 0.0};
        circ += dot(electron_a_potential(st, p, kC), t) * (2.0 * M_PI / n);
    }
    CHECK(f == doctest::Approx(circ).epsilon(1e-4));
    CHECK(std::fabs(f - circ) <= 0.005 * std::fabs(f));
}

TEST_CASE("evaluation inside the cutoff ball is refused") {
    const ElectronState st(-kC.e_charge, {1.0, 0.0, 0.0}, {0.0, 1e8, 0.0}, kC);
    CHECK_THROWS_AS(electron_e_field(st, {1.0, 0.0, 0.0}, kC), std::domain_error);
    CHECK_THROWS_AS(electron_e_field(st, {1.0, 0.0, 5e-10}, kC), std::domain_error);
    CHECK_THROWS_AS(electron_b_field(st, {1.0 + 1e-3, 0.0, 0.0}, kC,
                                     ElectronFieldModel::QuasiStatic, 1e-2),
                    std::domain_error);
    CHECK_NOTHROW(electron_e_field(st, {1.0, 0.0, 2e-9}, kC));
}

TEST_CASE("state validation") {
    CHECK_THROWS_AS(ElectronState(-kC.e_charge, {0, 0, 0}, {kC.c, 0, 0}, kC),
                    std::invalid_argument);
    CHECK_THROWS_AS(ElectronState(-kC.e_charge, {std::nan(""), 0, 0}, {0, 0, 0}, kC),
                    std::invalid_argument);
    CHECK_NOTHROW(ElectronState(-kC.e_charge, {0, 0, 0}, {0, 0, 0}, kC));
}

TEST_CASE("straight line trajectory") {
    const StraightLine line{{1.0, 2.0, 3.0}, {0.0, 1e8, 0.0}};
    const ElectronState st = state_at(Trajectory{line}, -kC.e_charge, 2e-8, kC);
    CHECK(st.position.y == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(st.position.x == 1.0);
    CHECK(st.velocity.y == 1e8);
}

TEST_CASE("circular arc trajectory keeps speed and tangency") {
    CircularArc arc;
    arc.center = {0.0, 0.0, 1.0};
    arc.axis = {0.0, 0.0, 1.0};
    arc.radius = 2.0;
    arc.omega = 1e7;
    arc.phase0 = 0.3;
    const ElectronState st = state_at(Trajectory{arc}, -kC.e_charge, 5e-8, kC);
    const Vec3 r = st.position - arc.center;
    CHECK(norm(r) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(std::fabs(dot(st.velocity, r)) < 1e-6 * norm(st.velocity) * 2.0);
    CHECK(norm(st.velocity) == doctest::Approx(2e7).epsilon(1e-13));
    // for a z axis the frame is e1 = yhat, e2 = -xhat
    const double angle = 0.3 + 1e7 * 5e-8;
    CHECK(st.position.y == doctest::Approx(2.0 * std::cos(angle)).epsilon(1e-13));
    CHECK(st.position.x == doctest::Approx(-2.0 * std::sin(angle)).epsilon(1e-13));
}

TEST_CASE("piecewise linear trajectory traverses at constant speed") {
    PiecewiseLinear path;
    path.points = {{0, 0, 0}, {3, 0, 0}, {3, 4, 0}};
    path.speed = 1e8;
    // total length 7 cm -> window [0, 7e-8] s
    const ElectronState a = state_at(Trajectory{path}, -kC.e_charge, 1.5e-8, kC);
    CHECK(a.position.x == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(a.velocity.x == doctest::Approx(1e8).epsilon(1e-12));
    const ElectronState b = state_at(Trajectory{path}, -kC.e_charge, 5e-8, kC);
    CHECK(b.position.x == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(b.position.y == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(b.velocity.y == doctest::Approx(1e8).epsilon(1e-12));

    CHECK_NOTHROW(state_at(Trajectory{path}, -kC.e_charge, 7e-8 * (1.0 + 1e-13), kC));
    CHECK_THROWS_AS(state_at(Trajectory{path}, -kC.e_charge, 7.1e-8, kC), std::out_of_range);
    CHECK_THROWS_AS(state_at(Trajectory{path}, -kC.e_charge, -1e-12, kC), std::out_of_range);

    PiecewiseLinear bad;
    bad.points = {{0, 0, 0}, {0, 0, 0}};
    bad.speed = 1e8;
    CHECK_THROWS_AS(state_at(Trajectory{bad}, -kC.e_charge, 0.0, kC), std::invalid_argument);
    PiecewiseLinear slow = path;
    slow.speed = 0.0;
    CHECK_THROWS_AS(state_at(Trajectory{slow}, -kC.e_charge, 0.0, kC), std::invalid_argument);
}

} // TEST_SUITE
