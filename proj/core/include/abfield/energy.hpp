#pragma once

#include <vector>

#include "abfield/constants.hpp"
#include "abfield/electron.hpp"
#include "abfield/geometry.hpp"
#include "abfield/quadrature.hpp"
#include "abfield/sources.hpp"

namespace abfield {

// Field-energy bookkeeping over a bounded region S, split exactly as
//   (B0 + Be)^2 / 8pi = B0^2/8pi + (B0 . Be)/4pi + Be^2/8pi.
struct EnergyLedger {
    double term_external = 0.0; // source-only energy in S, erg
    double term_cross = 0.0;    // overlap (interference) energy in S, erg
    double term_self = 0.0;     // electron-only energy in S, erg
    double total = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
};

struct EnergyOptions {
    // Ball excluded around the electron when it sits inside S; 0 selects
    // 1e-3 * region radius. The self-energy is reported for the truncated
    // field, never for a smoothed one.
    double self_exclusion_radius = 0.0;
    ElectronFieldModel model = ElectronFieldModel::QuasiStatic;
    bool with_external = true;
    bool with_cross = true;
    bool with_self = true;
};

// electron may be null: source-only ledger.
EnergyLedger energy_ledger(const ExternalField& src, const ElectronState* electron,
                           const CylinderRegion& region, const PhysicalConstants& k,
                           const QuadratureSpec& spec, const EnergyOptions& options = {});

// Response of a shorted (flux-conserving) winding to the electron's linked
// flux. For a finite solenoid the circuit relation is c L delta_I = -F_linked;
// the ideal infinite limit keeps delta_I = 0 while the stored-energy shift
// stays finite, bookkept over the caller's z-extent. Rotor and whisker
// sources have frozen kinematics: applicable is false and every delta is 0.
struct BackReaction {
    bool applicable = false;
    double linked_flux = 0.0;            // F_linked = n * integral of per-turn electron flux
    double inductance = 0.0;             // s^2/cm; 0 for the ideal limit
    double delta_I = 0.0;                // statA
    double delta_b0_inside = 0.0;        // 4 pi n delta_I / c, gauss
    double delta_term_external = 0.0;    // all-space stored-energy shift L I delta_I, erg
    double conservation_residual = 0.0;  // |c L delta_I + F_linked|
};

BackReaction back_reaction(const ExternalField& src, const ElectronState& electron,
                           const PhysicalConstants& k, const QuadratureSpec& spec,
                           double ideal_linkage_half_length = -1.0,
                           double inductance_hint = 0.0);

// Sweep of the cancellation between the back-reaction shift of the external
// term and the cross term, against solenoid aspect ratio.
struct CancellationSettings {
    std::vector<double> lengths; // solenoid lengths, cm
    std::vector<double> times;   // trajectory samples, s
    double region_radius_over_a = 1.05;
    double region_half_length_multiple = 5.0; // times length/2
};

struct CancellationSample {
    double aspect = 0.0;       // a / length
    double max_cross = 0.0;    // max_t |term_cross|
    double max_residual = 0.0; // max_t |delta_external + term_cross|
    double ratio = 0.0;
};

struct CancellationReport {
    std::vector<CancellationSample> samples;
    ScalingFit fit; // ratio vs aspect, when >= 3 lengths
};

CancellationReport cancellation_sweep(const ExternalField& prototype, const Trajectory& traj,
                                      double charge, const CancellationSettings& settings,
                                      const PhysicalConstants& k, const QuadratureSpec& spec);

// Poynting-flux rates through a closed surface (positive = inflow), split
// into the electron-only rate and the source-electron cross rate.
struct PoyntingReport {
    double rate_full = 0.0;     // (c/4pi) flux of E_e x (B0 + B_e), erg/s
    double rate_reduced = 0.0;  // (c/4pi) flux of E_e x B_e
    double cross_surface = 0.0; // (c/4pi) flux of E_e x B0
    double error_full = 0.0;    // per-term quadrature error estimates
    double error_reduced = 0.0;
    double error_cross = 0.0;
    double error_estimate = 0.0; // sum of the three
    bool converged = true;
};

PoyntingReport poynting_rate(const ExternalField& src, const ElectronState& electron,
                             const OrientedSurface& surface, const PhysicalConstants& k,
                             const QuadratureSpec& spec,
                             ElectronFieldModel model = ElectronFieldModel::QuasiStatic);

// max_t |rate_full(src1) - rate_full(src2)| normalized by
// max(max_t |rate_full(src1)|, spec.abs_tol). Two sources with equal
// exterior A but different flux exercise the energy-flow blindness of the
// exterior region.
double flux_independence_check(const ExternalField& src1, const ExternalField& src2,
                               const Trajectory& traj, double charge,
                               const std::vector<double>& times, const OrientedSurface& surface,
                               const PhysicalConstants& k, const QuadratureSpec& spec);

} // namespace abfield
