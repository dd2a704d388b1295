#pragma once

#include <cmath>
#include <stdexcept>

namespace abfield {

// Constant set threaded through every operation. Gaussian CGS is the default;
// the "natural" preset (c = hbar = e = 1) is a model world for dimensionless
// studies, not a rescaling of the CGS one.
struct PhysicalConstants {
    double c = 2.99792458e10;        // speed of light, cm/s
    double hbar = 1.054571817e-27;   // reduced Planck constant, erg s
    double e_charge = 4.80320471e-10; // elementary charge, statC

    static PhysicalConstants cgs() { return {}; }
    static PhysicalConstants natural() { return {1.0, 1.0, 1.0}; }

    // Phase accumulated per unit enclosed flux, rad / (G cm^2).
    double phase_per_flux() const { return e_charge / (hbar * c); }

    // Enclosed flux that shifts an interference pattern by one full period.
    double flux_quantum() const { return 2.0 * M_PI / phase_per_flux(); }

    void validate() const {
        if (!(c > 0.0) || !std::isfinite(c) ||
            !(hbar > 0.0) || !std::isfinite(hbar) ||
            !(e_charge > 0.0) || !std::isfinite(e_charge))
            throw std::invalid_argument("PhysicalConstants: c, hbar, e must be positive and finite");
    }
};

} // namespace abfield
