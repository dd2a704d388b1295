#include "abfield/sources.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "abfield/elliptic.hpp"

namespace abfield {

namespace {

constexpr double kSheetExclusion = 1e-9; // in units of the sheet radius

void require_source_geometry(double radius, double length) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw std::invalid_argument("source: radius must be positive and finite");
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument("source: length must be positive and finite");
}

void require_finite_param(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string("source: non-finite ") + what);
}

// Loop-stack kernels per unit sheet current, in the source frame. All three
// are integrals over the loop offset zeta = z - z' of combinations of
// complete elliptic integrals; the combinations below stay cancellation-free
// for both near-axis (m -> 0) and near-sheet (m -> 1) evaluation.
struct SheetGeometry {
    double radius = 0.0;
    double half_length = 0.0;
};

struct LoopKernels {
    double bz = 0.0; // integrand of S_z:  B_z  = (2 K / c) S_z
    double br = 0.0; // integrand of S_r:  B_rho = (2 K / (c rho)) S_r
};

LoopKernels loop_b_kernels(double A, double rho, double zeta) {
    const double sum = A + rho;
    const double dif = A - rho;
    const double d2 = sum * sum + zeta * zeta;
    const double den = dif * dif + zeta * zeta;
    const double inv_sqrt_d2 = 1.0 / std::sqrt(d2);
    const double m = 4.0 * A * rho / d2;
    const double kprime = std::sqrt(den) * inv_sqrt_d2;
    const EllipticEval el = complete_elliptic(m, std::min(kprime, 1.0));

    LoopKernels out;
    out.bz = (m * el.keq + 2.0 * A * dif * el.E / den) * inv_sqrt_d2;
    const double kp2 = den / d2;
    out.br = zeta * m * (el.E / (2.0 * kp2) - el.keq) * inv_sqrt_d2;
    return out;
}

// Axial integrand with the near-sheet spike removed: the full kernel is
// bz = bz_smooth + 2 A (A - rho) / (den sqrt(d2)), and the subtracted term
// tends to a Lorentzian of width |A - rho| at the sheet. Its lobes nearly
// cancel against the logarithmic keq part, so summing them numerically
// leaves roundoff ~ eps / distance; the smooth remainder has only an
// integrable log peak, and the Lorentzian integrates in closed form.
double bz_smooth_kernel(double A, double rho, double zeta) {
    const double sum = A + rho;
    const double dif = A - rho;
    const double d2 = sum * sum + zeta * zeta;
    const double den = dif * dif + zeta * zeta;
    const double inv_sqrt_d2 = 1.0 / std::sqrt(d2);
    const double m = 4.0 * A * rho / d2;
    const double kprime = std::sqrt(den) * inv_sqrt_d2;
    const EllipticEval el = complete_elliptic(m, std::min(kprime, 1.0));
    return (m * el.keq + 2.0 * A * dif * (el.E - 1.0) / den) * inv_sqrt_d2;
}

// Closed-form integral over [lo, hi] of the subtracted spike
//   2 A (A - rho) / (((A - rho)^2 + zeta^2) sqrt((A + rho)^2 + zeta^2)).
// Antiderivative: atan(s zeta / (p sqrt(q^2 + zeta^2))) / (p s) with
// p = |A - rho|, q = A + rho, s = 2 sqrt(A rho); p cancels against the
// prefactor, and a window that misses zeta = 0 goes through the arctangent
// addition law so nearby endpoints never cancel.
double bz_spike_integral(double A, double rho, double lo, double hi) {
    const double p = std::fabs(A - rho);
    if (p == 0.0) return 0.0; // the prefactor A - rho kills the whole term
    const double q = A + rho;
    const double q2 = q * q;
    const double s = 2.0 * std::sqrt(A * rho);
    const double rql = std::sqrt(q2 + lo * lo);
    const double rqh = std::sqrt(q2 + hi * hi);
    double delta_atan = 0.0;
    if (lo < 0.0 && hi > 0.0) {
        // Opposite-sign arctangents add; direct evaluation is stable.
        delta_atan = std::atan(s * hi / (p * rqh)) - std::atan(s * lo / (p * rql));
    } else {
        // Same-side window. core = (u_hi - u_lo) p / s rearranged so the
        // difference of nearby arguments is exact; denom = p (1 + u_hi u_lo).
        const double core = q2 * (hi - lo) * (hi + lo) / (rqh * rql * (hi * rql + lo * rqh));
        const double denom = p + s * s * (hi * lo) / (p * rqh * rql);
        delta_atan = std::atan(s * core / denom);
    }
    const double sign = (A >= rho) ? 1.0 : -1.0;
    return sign * 2.0 * A * delta_atan / s;
}

// Integrand of S_a: A_phi = (4 K A / c) S_a.
double loop_a_kernel(double A, double rho, double zeta) {
    const double sum = A + rho;
    const double dif = A - rho;
    const double d2 = sum * sum + zeta * zeta;
    const double den = dif * dif + zeta * zeta;
    const double inv_sqrt_d2 = 1.0 / std::sqrt(d2);
    const double m = 4.0 * A * rho / d2;
    const double kprime = std::sqrt(den) * inv_sqrt_d2;
    return complete_elliptic(m, std::min(kprime, 1.0)).fa * inv_sqrt_d2;
}

// Axial quadrature runs tighter than the caller's tolerance so that field
// error never dominates an outer integral's own estimate. The 1e-11 floor
// is the roundoff headroom of the kernel spike next to the sheet; tighter
// demands starve instead of converging.
QuadratureSpec axial_spec(const QuadratureSpec& spec, double abs_scale) {
    QuadratureSpec s = spec;
    s.rel_tol = std::clamp(spec.rel_tol * 1e-2, 1e-11, 1e-8);
    // The kernel integrals are order-one dimensionless sums, so 1e-11 of
    // abs_scale is already far below any caller's use of the field, while
    // staying above the roundoff left by resolving the kernel spike next
    // to the sheet; a tighter absolute demand starves instead of
    // converging.
    s.abs_tol = 1e-11 * abs_scale;
    s.max_subdivisions = std::max(spec.max_subdivisions, 40);
    return s;
}

void require_off_sheet(const SheetGeometry& g, double rho, double z, bool ideal) {
    const double radial = std::fabs(rho - g.radius);
    double dist = radial;
    if (!ideal && std::fabs(z) > g.half_length)
        dist = std::hypot(radial, std::fabs(z) - g.half_length);
    if (dist < kSheetExclusion * g.radius)
        throw std::domain_error("source field: evaluation point on the current sheet");
}

std::vector<double> zeta_breaks(double z, double L) {
    // The nearest-loop peak sits at zeta = 0; pin it on a cell edge.
    if (z > -L && z < L) return {0.0};
    return {};
}

double sz_integral(const SheetGeometry& g, double rho, double z, const QuadratureSpec& spec) {
    const double lo = z - g.half_length;
    const double hi = z + g.half_length;
    // Within half a radius of the sheet the spike subtraction is required
    // (and s = 2 sqrt(A rho) is safely order A there); farther out the full
    // kernel is smooth and cheaper.
    if (std::fabs(rho - g.radius) < 0.5 * g.radius) {
        const auto f = [&g, rho](double zeta) { return bz_smooth_kernel(g.radius, rho, zeta); };
        const IntegralResult r =
            integrate_1d(f, lo, hi, axial_spec(spec, 1.0), zeta_breaks(z, g.half_length));
        if (!r.converged)
            throw QuadratureError("b0_field: axial loop-stack quadrature did not converge");
        return r.value + bz_spike_integral(g.radius, rho, lo, hi);
    }
    const auto f = [&g, rho](double zeta) { return loop_b_kernels(g.radius, rho, zeta).bz; };
    const IntegralResult r =
        integrate_1d(f, lo, hi, axial_spec(spec, 1.0), zeta_breaks(z, g.half_length));
    if (!r.converged)
        throw QuadratureError("b0_field: axial loop-stack quadrature did not converge");
    return r.value;
}

double sr_integral(const SheetGeometry& g, double rho, double z, const QuadratureSpec& spec) {
    const auto f = [&g, rho](double zeta) { return loop_b_kernels(g.radius, rho, zeta).br; };
    // The radial kernel is exactly odd in zeta, so the largest symmetric
    // sub-window about zeta = 0 contributes nothing. Dropping it removes
    // the near-sheet spike from the quadrature entirely; the leftover tail
    // is smooth, and summing the spike's near-cancelling lobes in doubles
    // would otherwise leave roundoff ~ eps / distance that no tolerance
    // floor can cover.
    double lo = z - g.half_length;
    double hi = z + g.half_length;
    if (lo < 0.0 && hi > 0.0) {
        if (z >= 0.0)
            lo = g.half_length - z;
        else
            hi = -(g.half_length + z);
    }
    const IntegralResult r = integrate_1d(f, lo, hi, axial_spec(spec, g.radius), {});
    if (!r.converged)
        throw QuadratureError("b0_field: axial loop-stack quadrature did not converge");
    return r.value;
}

double sa_integral(const SheetGeometry& g, double rho, double z, const QuadratureSpec& spec) {
    const auto f = [&g, rho](double zeta) { return loop_a_kernel(g.radius, rho, zeta); };
    const IntegralResult r = integrate_1d(f, z - g.half_length, z + g.half_length,
                                          axial_spec(spec, 1.0), zeta_breaks(z, g.half_length));
    if (!r.converged)
        throw QuadratureError("a0_potential: axial loop-stack quadrature did not converge");
    return r.value;
}

} // namespace

ExternalField::ExternalField(const SolenoidSource& s, bool ideal_infinite)
    : kind_(SourceKind::Solenoid),
      ideal_(ideal_infinite),
      radius_(s.radius),
      half_length_(0.5 * s.length),
      frame_(s.placement.center, normalized(s.placement.axis)),
      drive_(s.current) {
    require_source_geometry(s.radius, s.length);
    if (!(s.turns_per_cm > 0.0) || !std::isfinite(s.turns_per_cm))
        throw std::invalid_argument("SolenoidSource: turns_per_cm must be positive");
    require_finite_param(s.current, "current");
    turns_ = s.turns_per_cm;
}

ExternalField::ExternalField(const RotorSource& s, bool ideal_infinite)
    : kind_(SourceKind::Rotor),
      ideal_(ideal_infinite),
      radius_(s.radius),
      half_length_(0.5 * s.length),
      frame_(s.placement.center, normalized(s.placement.axis)),
      drive_(s.charge_density * s.omega) {
    require_source_geometry(s.radius, s.length);
    require_finite_param(s.charge_density, "charge_density");
    require_finite_param(s.omega, "omega");
}

ExternalField::ExternalField(const WhiskerSource& s, bool ideal_infinite)
    : kind_(SourceKind::Whisker),
      ideal_(ideal_infinite),
      radius_(s.radius),
      half_length_(0.5 * s.length),
      frame_(s.placement.center, normalized(s.placement.axis)),
      drive_(s.magnetization) {
    require_source_geometry(s.radius, s.length);
    require_finite_param(s.magnetization, "magnetization");
}

double ExternalField::sheet_current(const PhysicalConstants& k) const {
    k.validate();
    switch (kind_) {
        case SourceKind::Solenoid: return turns_ * drive_;
        case SourceKind::Rotor: return drive_ * radius_; // sigma * omega * a
        case SourceKind::Whisker: return k.c * drive_;   // bound current of M
    }
    return 0.0;
}

double ExternalField::current() const {
    if (kind_ != SourceKind::Solenoid)
        throw std::logic_error("ExternalField::current: defined for solenoid sources only");
    return drive_;
}

double ExternalField::turns_per_cm() const {
    if (kind_ != SourceKind::Solenoid)
        throw std::logic_error("ExternalField::turns_per_cm: defined for solenoid sources only");
    return turns_;
}

ExternalField ExternalField::with_current_scale(double factor) const {
    if (!std::isfinite(factor))
        throw std::invalid_argument("with_current_scale: non-finite factor");
    ExternalField out = *this;
    out.drive_ *= factor;
    return out;
}

void b0_local(const ExternalField& src, double rho, double z, const PhysicalConstants& k,
              const QuadratureSpec& spec, double& b_rho, double& b_z) {
    k.validate();
    spec.validate();
    if (!(rho >= 0.0) || !std::isfinite(rho) || !std::isfinite(z))
        throw std::invalid_argument("b0_local: bad cylindrical point");

    const SheetGeometry g{src.radius(), src.half_length()};
    require_off_sheet(g, rho, z, src.ideal_infinite());
    const double K = src.sheet_current(k);

    if (src.ideal_infinite()) {
        b_rho = 0.0;
        b_z = (rho < src.radius()) ? 4.0 * M_PI * K / k.c : 0.0;
        return;
    }
    if (K == 0.0) {
        b_rho = 0.0;
        b_z = 0.0;
        return;
    }
    b_z = (2.0 * K / k.c) * sz_integral(g, rho, z, spec);
    b_rho = (rho < 1e-12 * src.radius())
                ? 0.0
                : (2.0 * K / (k.c * rho)) * sr_integral(g, rho, z, spec);
}

double a0_local(const ExternalField& src, double rho, double z, const PhysicalConstants& k,
                const QuadratureSpec& spec) {
    k.validate();
    spec.validate();
    if (!(rho >= 0.0) || !std::isfinite(rho) || !std::isfinite(z))
        throw std::invalid_argument("a0_local: bad cylindrical point");

    const SheetGeometry g{src.radius(), src.half_length()};
    require_off_sheet(g, rho, z, src.ideal_infinite());
    const double K = src.sheet_current(k);
    const double a = src.radius();

    if (src.ideal_infinite()) {
        if (rho <= a) return 2.0 * M_PI * K * rho / k.c;
        return 2.0 * M_PI * K * a * a / (k.c * rho);
    }
    if (K == 0.0 || rho == 0.0) return 0.0;
    return (4.0 * K * a / k.c) * sa_integral(g, rho, z, spec);
}

Vec3 b0_field(const ExternalField& src, const Vec3& r, const PhysicalConstants& k,
              const QuadratureSpec& spec) {
    if (!is_finite(r)) throw std::invalid_argument("b0_field: non-finite point");
    double rho, phi, z;
    src.frame().to_cylindrical(r, rho, phi, z);
    double b_rho, b_z;
    b0_local(src, rho, z, k, spec, b_rho, b_z);
    const Vec3 rho_hat = src.frame().e1 * std::cos(phi) + src.frame().e2 * std::sin(phi);
    return rho_hat * b_rho + src.frame().axis * b_z;
}

Vec3 a0_potential(const ExternalField& src, const Vec3& r, const PhysicalConstants& k,
                  const QuadratureSpec& spec) {
    if (!is_finite(r)) throw std::invalid_argument("a0_potential: non-finite point");
    double rho, phi, z;
    src.frame().to_cylindrical(r, rho, phi, z);
    const double a_phi = a0_local(src, rho, z, k, spec);
    const Vec3 phi_hat = src.frame().e2 * std::cos(phi) - src.frame().e1 * std::sin(phi);
    return phi_hat * a_phi;
}

double flux(const ExternalField& src, const PhysicalConstants& k, const QuadratureSpec& spec) {
    k.validate();
    spec.validate();
    const double K = src.sheet_current(k);
    const double a = src.radius();
    if (src.ideal_infinite() || K == 0.0)
        return 4.0 * M_PI * M_PI * K * a * a / k.c; // pi a^2 * (4 pi K / c)

    const SheetGeometry g{a, src.half_length()};
    QuadratureSpec outer = spec;
    outer.abs_tol = 0.0; // flux scale is the value itself
    outer.max_subdivisions = std::max(spec.max_subdivisions, 20);
    const auto f = [&](double rho) { return rho * sz_integral(g, rho, 0.0, spec); };
    const IntegralResult r = integrate_1d(f, 0.0, a, outer);
    if (!r.converged) throw QuadratureError("flux: radial quadrature did not converge");
    return 2.0 * M_PI * (2.0 * K / k.c) * r.value;
}

double self_inductance(const ExternalField& src, const PhysicalConstants& k,
                       const QuadratureSpec& spec) {
    k.validate();
    spec.validate();
    if (src.kind() != SourceKind::Solenoid)
        throw std::invalid_argument("self_inductance: defined for solenoid windings");
    if (src.ideal_infinite())
        throw std::invalid_argument("self_inductance: ideal infinite solenoid has no finite L");

    const double a = src.radius();
    const double L = src.half_length();
    const double n = src.turns_per_cm();
    const SheetGeometry g{a, L};

    // Field energy at unit drive current (sheet current n * 1); L = 2 W.
    // The all-space integral is truncated at an outer margin s grown until
    // the energy it adds is negligible; the external field beyond s falls
    // like the end-monopole tail, so a fixed growth factor converges fast.
    QuadratureSpec w_spec = spec;
    w_spec.abs_tol = 0.0;
    const double unit_K = n;
    const auto density = [&](double rho, double z) {
        const double sz = sz_integral(g, rho, z, spec);
        const double sr = (rho < 1e-12 * a) ? 0.0 : sr_integral(g, rho, z, spec) / rho;
        const double bz = (2.0 * unit_K / k.c) * sz;
        const double br = (2.0 * unit_K / k.c) * sr;
        return (bz * bz + br * br) / (8.0 * M_PI);
    };

    double margin = 12.0 * a;
    double w_prev = -1.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        const IntegralResult half =
            integrate_axisymmetric(density, 0.0, margin, 0.0, L + margin, w_spec,
                                   {a}, {L});
        if (!half.converged)
            throw QuadratureError("self_inductance: energy quadrature did not converge");
        const double w = 2.0 * half.value; // z-symmetric
        if (w_prev > 0.0 &&
            std::fabs(w - w_prev) <= std::max(1e-3, 3.0 * spec.rel_tol) * std::fabs(w))
            return 2.0 * w;
        w_prev = w;
        margin *= 1.6;
    }
    throw QuadratureError("self_inductance: outer truncation did not converge");
}

} // namespace abfield
