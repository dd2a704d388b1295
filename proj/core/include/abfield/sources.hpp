#pragma once

#include "abfield/constants.hpp"
#include "abfield/geometry.hpp"
#include "abfield/quadrature.hpp"
#include "abfield/vec3.hpp"

namespace abfield {

// Pose of a cylindrical source: center of the winding, unit symmetry axis.
struct Placement {
    Vec3 center{0.0, 0.0, 0.0};
    Vec3 axis{0.0, 0.0, 1.0};
};

// Tightly wound solenoid: radius, full length, turns per cm, current in statA.
struct SolenoidSource {
    double radius = 1.0;
    double length = 1.0;
    double turns_per_cm = 1.0;
    double current = 0.0;
    Placement placement{};
};

// Charged cylinder shell of surface charge density sigma (statC/cm^2)
// spinning at omega (rad/s): surface current density sigma * omega * a.
struct RotorSource {
    double radius = 1.0;
    double length = 1.0;
    double charge_density = 0.0;
    double omega = 0.0;
    Placement placement{};
};

// Uniformly magnetized cylinder ("whisker"), axial magnetization M in gauss:
// equivalent bound surface current density c * M.
struct WhiskerSource {
    double radius = 1.0;
    double length = 1.0;
    double magnetization = 0.0;
    Placement placement{};
};

enum class SourceKind { Solenoid, Rotor, Whisker };

// Any of the three sources reduced to the one thing that fixes its field:
// an azimuthal current sheet of density K on a cylinder. With
// ideal_infinite set, the sheet extends to z = +-infinity and the field is
// the textbook closed form (uniform inside, zero outside).
class ExternalField {
  public:
    explicit ExternalField(const SolenoidSource& s, bool ideal_infinite = false);
    explicit ExternalField(const RotorSource& s, bool ideal_infinite = false);
    explicit ExternalField(const WhiskerSource& s, bool ideal_infinite = false);

    SourceKind kind() const { return kind_; }
    bool ideal_infinite() const { return ideal_; }
    double radius() const { return radius_; }
    double length() const { return 2.0 * half_length_; }
    double half_length() const { return half_length_; }
    const AxisFrame& frame() const { return frame_; }

    // Sheet current density in statA/cm; the whisker mapping needs c.
    double sheet_current(const PhysicalConstants& k) const;

    // Drive current of the winding (statA); defined for solenoids only.
    double current() const;
    double turns_per_cm() const;

    // Same geometry with the drive parameter (I, sigma, or M) scaled.
    ExternalField with_current_scale(double factor) const;

  private:
    SourceKind kind_;
    bool ideal_;
    double radius_;
    double half_length_;
    AxisFrame frame_;
    double drive_;     // I, sigma * omega, or M depending on kind
    double turns_ = 0.0; // solenoid winding density
};

// Magnetic field of the source at a world point. Finite sheets are stacked
// loops integrated axially with adaptive Gauss-Legendre; evaluation closer
// to the sheet than 1e-9 * radius throws std::domain_error.
Vec3 b0_field(const ExternalField& src, const Vec3& r, const PhysicalConstants& k,
              const QuadratureSpec& spec);

// Vector potential in the symmetric (azimuthal) gauge.
Vec3 a0_potential(const ExternalField& src, const Vec3& r, const PhysicalConstants& k,
                  const QuadratureSpec& spec);

// Cylindrical-component evaluation in the source frame; rho >= 0.
// Faster inner loop for axisymmetric quadratures, same sheet exclusion.
void b0_local(const ExternalField& src, double rho, double z, const PhysicalConstants& k,
              const QuadratureSpec& spec, double& b_rho, double& b_z);
double a0_local(const ExternalField& src, double rho, double z, const PhysicalConstants& k,
                const QuadratureSpec& spec);

// Flux through the midplane cross-section of the bore.
double flux(const ExternalField& src, const PhysicalConstants& k, const QuadratureSpec& spec);

// Self-inductance of a finite solenoid winding in s^2/cm, from the total
// field energy: L = 2 W / I^2, so the linked flux is c L I. Throws for
// ideal or non-solenoid sources.
double self_inductance(const ExternalField& src, const PhysicalConstants& k,
                       const QuadratureSpec& spec);

} // namespace abfield
