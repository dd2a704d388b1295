#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "abfield/quadrature.hpp"

using namespace abfield;

TEST_SUITE("quadrature") {

TEST_CASE("spec validation rejects out-of-range settings") {
    QuadratureSpec s;
    CHECK_NOTHROW(s.validate());
    CHECK_THROWS_AS(s.with_rel_tol(0.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(s.with_rel_tol(0.9).validate(), std::invalid_argument);
    CHECK_THROWS_AS(s.with_abs_tol(-1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(s.with_max_subdivisions(-1).validate(), std::invalid_argument);
    CHECK_THROWS_AS(s.with_base_order(1).validate(), std::invalid_argument);
}

TEST_CASE("1d integrals hit analytic values") {
    QuadratureSpec spec;
    spec.rel_tol = 1e-12;
    spec.abs_tol = 0.0;

    const auto cubic = integrate_1d([](double x) { return x * x * x; }, 0.0, 1.0, spec);
    CHECK(cubic.converged);
    CHECK(cubic.value == doctest::Approx(0.25).epsilon(1e-14));

    const auto sine = integrate_1d([](double x) { return std::sin(x); }, 0.0, M_PI, spec);
    CHECK(sine.converged);
    CHECK(sine.value == doctest::Approx(2.0).epsilon(1e-13));

    // odd integrand over a symmetric interval: needs the absolute floor
    const auto odd = integrate_1d([](double x) { return x * std::exp(-x * x); }, -2.0, 2.0,
                                  spec.with_abs_tol(1e-14));
    CHECK(odd.converged);
    CHECK(std::fabs(odd.value) < 1e-14);
}

TEST_CASE("a pinned break resolves a kink at full accuracy") {
    QuadratureSpec spec;
    spec.rel_tol = 1e-12;
    spec.abs_tol = 0.0;
    const auto f = [](double x) { return std::fabs(x - 0.3); };
    // integral of |x - 0.3| over [0, 1] = (0.09 + 0.49) / 2
    const auto with_break = integrate_1d(f, 0.0, 1.0, spec, {0.3});
    CHECK(with_break.converged);
    CHECK(with_break.value == doctest::Approx(0.29).epsilon(1e-14));
    const auto no_break = integrate_1d(f, 0.0, 1.0, spec.with_rel_tol(1e-9));
    CHECK(no_break.evaluations > with_break.evaluations);
}

TEST_CASE("volume integrals reproduce region volumes and moments") {
    QuadratureSpec spec;
    spec.rel_tol = 1e-10;
    spec.abs_tol = 0.0;

    const CylinderRegion cyl({0.5, -1.0, 2.0}, normalized(Vec3{0, 1, 1}), 1.5, 2.0);
    const auto vol = volume_integral([](const Vec3&) { return 1.0; }, cyl, spec);
    CHECK(vol.converged);
    CHECK(vol.value == doctest::Approx(cyl.volume()).epsilon(1e-11));

    const TorusRegion tor({0, 0, 0}, {0, 0, 1}, 2.0, 0.7);
    const auto tvol = volume_integral([](const Vec3&) { return 1.0; }, tor, spec);
    CHECK(tvol.converged);
    CHECK(tvol.value == doctest::Approx(tor.volume()).epsilon(1e-11));

    // second moment over the cylinder cross-section: integral of rho^2 dV
    const CylinderRegion axial({0, 0, 0}, {0, 0, 1}, 1.5, 2.0);
    const auto mom = volume_integral(
        [](const Vec3& p) { return p.x * p.x + p.y * p.y; }, axial, spec);
    const double expect = 2.0 * M_PI * std::pow(1.5, 4) / 4.0 * 4.0;
    CHECK(mom.value == doctest::Approx(expect).epsilon(1e-11));
}

TEST_CASE("axisymmetric fast path matches its closed form") {
    QuadratureSpec spec;
    spec.rel_tol = 1e-11;
    spec.abs_tol = 0.0;
    const auto unit = integrate_axisymmetric([](double, double) { return 1.0; }, 0.0, 2.0,
                                             -1.0, 3.0, spec);
    CHECK(unit.converged);
    CHECK(unit.value == doctest::Approx(M_PI * 4.0 * 4.0).epsilon(1e-12));

    const auto rhosq = integrate_axisymmetric([](double rho, double) { return rho * rho; },
                                              0.0, 2.0, 0.0, 1.0, spec);
    CHECK(rhosq.value == doctest::Approx(2.0 * M_PI * 16.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("unit square and cube charts integrate exactly") {
    QuadratureSpec spec;
    spec.rel_tol = 1e-12;
    spec.abs_tol = 0.0;
    const auto sq =
        integrate_unit_square([](double u, double v) { return u * v; }, spec);
    CHECK(sq.value == doctest::Approx(0.25).epsilon(1e-14));

    const double scale[3] = {1.0, 2.0, 3.0};
    const auto cube = integrate_unit_cube(
        [](double u, double v, double w) { return u * u * v * w; }, spec, scale);
    CHECK(cube.value == doctest::Approx(1.0 / 12.0).epsilon(1e-13));

    const double bad_scale[3] = {1.0, -1.0, 1.0};
    CHECK_THROWS_AS(integrate_unit_cube([](double, double, double) { return 1.0; }, spec,
                                        bad_scale),
                    std::invalid_argument);
}

TEST_CASE("linearity holds to quadrature accuracy") {
    QuadratureSpec spec;
    spec.rel_tol = 1e-12;
    spec.abs_tol = 0.0;
    const auto f = [](double x) { return std::exp(-x) * std::cos(3.0 * x); };
    const auto g = [](double x) { return 1.0 / (1.0 + x * x); };
    const double lhs =
        integrate_1d([&](double x) { return 2.0 * f(x) + 3.0 * g(x); }, 0.0, 2.0, spec).value;
    const double rhs = 2.0 * integrate_1d(f, 0.0, 2.0, spec).value +
                       3.0 * integrate_1d(g, 0.0, 2.0, spec).value;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("closed-surface fluxes follow the divergence theorem") {
    QuadratureSpec spec;
    spec.rel_tol = 1e-9;
    spec.abs_tol = 1e-12;

    const CylinderRegion cyl({0, 0, 0}, {0, 0, 1}, 1.0, 1.0);
    const OrientedSurface surf = OrientedSurface::from_cylinder(cyl);

    // constant field: zero net flux
    const auto c0 =
        surface_flux_integral([](const Vec3&) { return Vec3{0.4, -1.0, 2.0}; }, surf, spec);
    CHECK(c0.converged);
    CHECK(std::fabs(c0.value) < 1e-10);

    // position field, div = 3: inward flux is -3V
    const auto rad = surface_flux_integral([](const Vec3& p) { return p; }, surf, spec);
    CHECK(rad.value == doctest::Approx(-3.0 * cyl.volume()).epsilon(1e-10));

    // wall panel only, radial unit field: -(wall area) = -4 pi a h
    const auto wall = surface_flux_integral(
        [](const Vec3& p) {
            const double rho = std::hypot(p.x, p.y);
            return Vec3{p.x / rho, p.y / rho, 0.0};
        },
        surf, spec, 0);
    CHECK(wall.value == doctest::Approx(-4.0 * M_PI).epsilon(1e-10));

    const TorusRegion tor({0, 0, 0}, {0, 0, 1}, 2.0, 0.5);
    const OrientedSurface tsurf = OrientedSurface::from_torus(tor);
    const auto t0 =
        surface_flux_integral([](const Vec3&) { return Vec3{1.0, 1.0, 1.0}; }, tsurf, spec);
    CHECK(std::fabs(t0.value) < 1e-10);
    const auto t3 = surface_flux_integral([](const Vec3& p) { return p; }, tsurf, spec);
    CHECK(t3.value == doctest::Approx(-3.0 * tor.volume()).epsilon(1e-9));
}

TEST_CASE("order doubling gives a trustworthy error estimate") {
    // Runge-style integrand: compare a loose run against a tight reference.
    const auto f = [](double x) { return 1.0 / (1.0 + 25.0 * x * x); };
    QuadratureSpec loose;
    loose.rel_tol = 1e-4;
    loose.abs_tol = 0.0;
    QuadratureSpec tight;
    tight.rel_tol = 1e-13;
    tight.abs_tol = 0.0;
    const auto lo = integrate_1d(f, -1.0, 1.0, loose);
    const auto hi = integrate_1d(f, -1.0, 1.0, tight);
    CHECK(lo.converged);
    CHECK(hi.converged);
    CHECK(std::fabs(lo.value - hi.value) <= 3.0 * lo.error_estimate + 1e-15);
}

TEST_CASE("refinement starvation is reported, not hidden") {
    QuadratureSpec cramped;
    cramped.rel_tol = 1e-10;
    cramped.abs_tol = 0.0;
    cramped.max_subdivisions = 0;
    cramped.base_order = 4;
    const auto r = integrate_1d([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0,
                                cramped);
    CHECK(!r.converged);
    CHECK(r.error_estimate > 0.0);
}

TEST_CASE("results are bitwise identical across worker counts") {
    const char* saved = std::getenv("ABFIELD_THREADS");
    const std::string saved_copy = saved ? saved : "";
    QuadratureSpec spec;
    spec.rel_tol = 1e-9;
    spec.abs_tol = 0.0;
    const CylinderRegion cyl({0, 0, 0}, {0, 0, 1}, 1.0, 1.0);
    const auto f = [](const Vec3& p) {
        return std::exp(-norm2(p)) + std::cos(4.0 * p.z) * p.x * p.x;
    };

    setenv("ABFIELD_THREADS", "1", 1);
    const auto r1 = volume_integral(f, cyl, spec);
    setenv("ABFIELD_THREADS", "5", 1);
    const auto r5 = volume_integral(f, cyl, spec);
    if (saved)
        setenv("ABFIELD_THREADS", saved_copy.c_str(), 1);
    else
        unsetenv("ABFIELD_THREADS");

    CHECK(r1.value == r5.value); // exact bit equality
    CHECK(r1.error_estimate == r5.error_estimate);
    CHECK(r1.evaluations == r5.evaluations);
}

TEST_CASE("power-law fit recovers exact laws and rejects degenerate input") {
    std::vector<std::pair<double, double>> samples;
    for (const double x : {0.5, 1.0, 2.0, 4.0, 8.0})
        samples.push_back({x, 2.5 * std::pow(x, 1.7)});
    const ScalingFit fit = power_law_fit(samples);
    CHECK(fit.exponent == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(fit.prefactor == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(power_law_fit({{1.0, 1.0}, {2.0, 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(power_law_fit({{1.0, 1.0}, {1.0, 2.0}, {1.0, 3.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(power_law_fit({{1.0, 1.0}, {2.0, -2.0}, {3.0, 3.0}}),
                    std::invalid_argument);
}

} // TEST_SUITE
