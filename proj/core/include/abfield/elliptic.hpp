#pragma once

namespace abfield {

// Complete elliptic integrals in the parameter m = k^2, via the
// arithmetic-geometric mean, converged to ~1e-14 relative.
//
// Field kernels need two combinations that lose precision when formed
// naively at small m, so they are accumulated from the AGM sequence
// directly (all-positive sums):
//   keq = (K - E) / m            -> pi/4 as m -> 0
//   fa  = ((2 - m) K - 2 E) / m  -> (pi/16) m as m -> 0
struct EllipticEval {
    double K = 0.0;
    double E = 0.0;
    double keq = 0.0;
    double fa = 0.0;
};

// Requires 0 <= m < 1; evaluation at m >= 1 (a point on a source loop)
// throws std::domain_error. kprime = sqrt(1 - m) may be passed when the
// caller can form it more accurately than 1 - m allows.
EllipticEval complete_elliptic(double m);
EllipticEval complete_elliptic(double m, double kprime);

} // namespace abfield
