#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "abfield/geometry.hpp"
#include "abfield/vec3.hpp"

namespace abfield {

// Raised when an operation that must return a plain number cannot reach
// the requested accuracy. Operations returning IntegralResult report
// `converged` instead and never throw for this.
struct QuadratureError : std::runtime_error {
    explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureSpec {
    double rel_tol = 1e-6;
    double abs_tol = 1e-12;
    int max_subdivisions = 12; // dyadic refinement levels per dimension
    int base_order = 8;        // Gauss-Legendre points per dimension per cell

    void validate() const;

    QuadratureSpec with_rel_tol(double r) const { auto s = *this; s.rel_tol = r; return s; }
    QuadratureSpec with_abs_tol(double a) const { auto s = *this; s.abs_tol = a; return s; }
    QuadratureSpec with_max_subdivisions(int m) const { auto s = *this; s.max_subdivisions = m; return s; }
    QuadratureSpec with_base_order(int o) const { auto s = *this; s.base_order = o; return s; }
};

struct IntegralResult {
    double value = 0.0;
    double error_estimate = 0.0; // order-doubling comparison, summed over cells
    long evaluations = 0;
    bool converged = false;
};

// Least-squares power law y = C x^p fitted in log-log space.
struct ScalingFit {
    std::vector<std::pair<double, double>> samples;
    double exponent = 0.0;
    double prefactor = 0.0;
    double r_squared = 0.0;
};

// Adaptive Gauss-Legendre on [a, b]. `breaks` pins known non-smooth
// abscissae onto initial cell boundaries.
IntegralResult integrate_1d(const std::function<double(double)>& f,
                            double a, double b, const QuadratureSpec& spec,
                            const std::vector<double>& breaks = {});

// Volume integral in the region's native cylindrical coordinates.
// Breaks are radii / axial offsets in the region frame.
IntegralResult volume_integral(const std::function<double(const Vec3&)>& f,
                               const CylinderRegion& region, const QuadratureSpec& spec,
                               const std::vector<double>& radial_breaks = {},
                               const std::vector<double>& axial_breaks = {});

IntegralResult volume_integral(const std::function<double(const Vec3&)>& f,
                               const TorusRegion& region, const QuadratureSpec& spec);

// 2 pi * integral of f(rho, z) * rho over [rho0,rho1] x [z0,z1]; the fast
// path for integrands with the source's axial symmetry.
IntegralResult integrate_axisymmetric(const std::function<double(double, double)>& f,
                                      double rho0, double rho1, double z0, double z1,
                                      const QuadratureSpec& spec,
                                      const std::vector<double>& radial_breaks = {},
                                      const std::vector<double>& axial_breaks = {});

// Adaptive integral of f(u, v) over the unit square; the caller owns any
// coordinate chart and jacobian. Breaks are in chart coordinates.
IntegralResult integrate_unit_square(const std::function<double(double, double)>& f,
                                     const QuadratureSpec& spec,
                                     const std::vector<double>& breaks_u = {},
                                     const std::vector<double>& breaks_v = {});

// Same over the unit cube. `scale` weights the split heuristic with the
// physical extent each chart direction represents.
IntegralResult integrate_unit_cube(const std::function<double(double, double, double)>& f,
                                   const QuadratureSpec& spec,
                                   const double (&scale)[3],
                                   const std::vector<double>& breaks_u = {},
                                   const std::vector<double>& breaks_v = {},
                                   const std::vector<double>& breaks_w = {});

// Flux of the vector field through the closed surface with its stored
// (inward) orientation. panel < 0 integrates every panel; wall_breaks pins
// axial offsets on the cylinder wall panel.
IntegralResult surface_flux_integral(const std::function<Vec3(const Vec3&)>& field,
                                     const OrientedSurface& surface, const QuadratureSpec& spec,
                                     int panel = -1,
                                     const std::vector<double>& wall_breaks = {});

// Requires >= 3 samples with positive x and y.
ScalingFit power_law_fit(const std::vector<std::pair<double, double>>& samples);

} // namespace abfield
