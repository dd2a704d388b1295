#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "abfield/constants.hpp"
#include "abfield/geometry.hpp"
#include "abfield/quadrature.hpp"
#include "abfield/vec3.hpp"

namespace abfield {

// Any vector potential, including gauge-shifted wrappers.
using VectorPotential = std::function<Vec3(const Vec3&)>;

// Beam arm as a polyline from emitter to screen; >= 2 points.
struct BeamPath {
    std::vector<Vec3> points;
};

// (e / hbar c) * integral of A . dl along the path, in radians. The
// magnitude convention uses the positive elementary charge.
double path_phase(const VectorPotential& a, const BeamPath& path, const PhysicalConstants& k,
                  const QuadratureSpec& spec);

struct PhaseResult {
    double phase = 0.0;        // offset + arm1 phase - arm2 phase, rad
    double phase_offset = 0.0; // field-free contribution carried through
    double slope = 0.0;        // d(phase)/d(enclosed flux) = e/(hbar c)
    double winding = 0.0;      // signed turns of arm1 - reversed arm2 about the axis
    bool unit_winding = false; // |winding| within 1e-6 of 1
};

// Two-arm interferometer phase. Arms must share both endpoints; a
// zero-winding pair is reported, not rejected. Paths touching the axis
// throw std::invalid_argument (the winding number would be undefined).
PhaseResult relative_phase(const VectorPotential& a, const AxisFrame& axis,
                           const BeamPath& arm1, const BeamPath& arm2, double phase_offset,
                           const PhysicalConstants& k, const QuadratureSpec& spec);

// A + grad(chi) with the gradient taken by central differences of width step.
VectorPotential gauge_shifted(VectorPotential base, std::function<double(const Vec3&)> chi,
                              double step);

// Screen intensity 1 + cos(2 pi x / spacing + phase) sampled on [x0, x1].
std::vector<std::pair<double, double>> fringe_pattern(double phase, double spacing, double x0,
                                                      double x1, int samples);

} // namespace abfield
