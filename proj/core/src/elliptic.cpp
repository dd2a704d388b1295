#include "abfield/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abfield {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
} // namespace

EllipticEval complete_elliptic(double m, double kprime) {
    // With kprime supplied exactly, m may round up to 1 (or a couple of
    // ulps past) when 1 - m underflows the division that produced it; the
    // evaluation stays finite through kprime, so only reject real overshoot.
    if (!(std::isfinite(m) && m >= 0.0 && m <= 1.0 + 8.0 * 1e-16)) {
        throw std::domain_error("complete_elliptic: parameter m must lie in [0, 1]");
    }
    if (!(std::isfinite(kprime) && kprime > 0.0 && kprime <= 1.0)) {
        throw std::domain_error("complete_elliptic: kprime must lie in (0, 1]");
    }
    m = std::min(m, 1.0);

    // AGM sequence a_n, b_n with c_{n+1} = c_n^2 / (4 a_{n+1}); the identity
    // c_{n+1} = (a_n - b_n)/2 is exact, and the seed c_1 = m / (2 (1 + k'))
    // avoids the cancellation in (1 - k')/2 at small m.
    double a = 1.0;
    double b = kprime;
    double c = m / (2.0 * (1.0 + kprime));

    // s1 = sum_{n>=1} 2^{n-1} c_n^2; every kernel combination below is an
    // all-positive expression in s1, so small-m accuracy is uniform.
    double s1 = 0.0;
    double pow2 = 1.0;
    for (int n = 0; n < 40; ++n) {
        const double term = pow2 * c * c;
        s1 += term;
        const double an = 0.5 * (a + b);
        const double bn = std::sqrt(a * b);
        a = an;
        b = bn;
        c = (c * c) / (2.0 * (a + b)); // c_{n+1} = c_n^2 / (4 a_{n+1})
        pow2 *= 2.0;
        if (term <= 1e-22 * (1.0 + s1) && (a - b) <= 1e-16 * a) break;
    }

    EllipticEval out;
    out.K = kPi / (2.0 * a);
    out.E = out.K * (1.0 - 0.5 * m - s1);
    if (m > 0.0) {
        out.keq = out.K * (0.5 + s1 / m);
        out.fa = 2.0 * out.K * (s1 / m);
    } else {
        out.keq = kPi / 4.0;
        out.fa = 0.0;
    }
    return out;
}

EllipticEval complete_elliptic(double m) {
    if (!(std::isfinite(m) && m >= 0.0 && m < 1.0)) {
        throw std::domain_error("complete_elliptic: parameter m must lie in [0, 1)");
    }
    return complete_elliptic(m, std::sqrt(1.0 - m));
}

} // namespace abfield
