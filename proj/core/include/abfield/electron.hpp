#pragma once

#include <variant>
#include <vector>

#include "abfield/constants.hpp"
#include "abfield/quadrature.hpp"
#include "abfield/vec3.hpp"

namespace abfield {

// Point charge with instantaneous position and velocity; |v| < c enforced
// against the constant set the state will be used with.
struct ElectronState {
    double charge = 0.0; // statC, sign included
    Vec3 position{};
    Vec3 velocity{};

    ElectronState(double charge_, const Vec3& position_, const Vec3& velocity_,
                  const PhysicalConstants& k);
};

// Field models for the moving charge. QuasiStatic is the v/c << 1 limit
// used throughout the energy bookkeeping; BoostedCoulomb is the exact
// uniform-velocity solution for checking that the limit is adequate.
enum class ElectronFieldModel { QuasiStatic, BoostedCoulomb };

// Fields at r. Evaluation within `cutoff` of the charge throws
// std::domain_error: the point-charge self-ball is excluded, never smoothed.
Vec3 electron_e_field(const ElectronState& s, const Vec3& r, const PhysicalConstants& k,
                      ElectronFieldModel model = ElectronFieldModel::QuasiStatic,
                      double cutoff = 1e-9);
Vec3 electron_b_field(const ElectronState& s, const Vec3& r, const PhysicalConstants& k,
                      ElectronFieldModel model = ElectronFieldModel::QuasiStatic,
                      double cutoff = 1e-9);

// Quasi-static vector potential q v / (c R).
Vec3 electron_a_potential(const ElectronState& s, const Vec3& r, const PhysicalConstants& k,
                          double cutoff = 1e-9);

// Circular loop for flux-linkage bookkeeping.
struct LoopSpec {
    Vec3 center{};
    Vec3 axis{0.0, 0.0, 1.0}; // normalized at use
    double radius = 1.0;
};

// Flux of the electron's magnetic field through the loop's spanning disc.
double electron_flux_through_loop(const ElectronState& s, const LoopSpec& loop,
                                  const PhysicalConstants& k, const QuadratureSpec& spec,
                                  ElectronFieldModel model = ElectronFieldModel::QuasiStatic);

// Prescribed trajectories: position and velocity are exact functions of
// time, not integrated. PiecewiseLinear runs at constant speed from the
// first point, and t outside the traversal window throws std::out_of_range.
struct StraightLine {
    Vec3 point0{};
    Vec3 velocity{};
};

struct CircularArc {
    Vec3 center{};
    Vec3 axis{0.0, 0.0, 1.0};
    double radius = 1.0;
    double omega = 0.0;  // rad/s, sign sets orientation
    double phase0 = 0.0; // angle at t = 0
};

struct PiecewiseLinear {
    std::vector<Vec3> points; // >= 2, consecutive points distinct
    double speed = 0.0;       // > 0
};

using Trajectory = std::variant<StraightLine, CircularArc, PiecewiseLinear>;

ElectronState state_at(const Trajectory& traj, double charge, double t,
                       const PhysicalConstants& k);

} // namespace abfield
