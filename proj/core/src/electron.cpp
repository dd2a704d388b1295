#include "abfield/electron.hpp"

#include <cmath>
#include <stdexcept>

namespace abfield {

namespace {

Vec3 separation_or_throw(const ElectronState& s, const Vec3& r, double cutoff) {
    if (!is_finite(r)) throw std::invalid_argument("electron field: non-finite point");
    if (!(cutoff > 0.0) || !std::isfinite(cutoff))
        throw std::invalid_argument("electron field: cutoff must be positive");
    const Vec3 R = r - s.position;
    if (norm2(R) < cutoff * cutoff)
        throw std::domain_error("electron field: evaluation inside the point-charge cutoff ball");
    return R;
}

// Coulomb field times the uniform-velocity anisotropy when requested:
// E = q (1 - beta^2) R / (R^3 (1 - beta^2 sin^2 psi)^{3/2}), psi the angle
// between v and R. B = beta x E in both models.
Vec3 e_field_impl(const ElectronState& s, const Vec3& R, const PhysicalConstants& k,
                  ElectronFieldModel model) {
    const double R2 = norm2(R);
    const double R1 = std::sqrt(R2);
    Vec3 E = s.charge / (R2 * R1) * R;
    if (model == ElectronFieldModel::BoostedCoulomb) {
        const double beta2 = norm2(s.velocity) / (k.c * k.c);
        if (beta2 > 0.0) {
            const double along = dot(s.velocity, R) / (norm(s.velocity) * R1);
            const double sin2 = std::max(0.0, 1.0 - along * along);
            E *= (1.0 - beta2) / std::pow(1.0 - beta2 * sin2, 1.5);
        }
    }
    return E;
}

} // namespace

ElectronState::ElectronState(double charge_, const Vec3& position_, const Vec3& velocity_,
                             const PhysicalConstants& k)
    : charge(charge_), position(position_), velocity(velocity_) {
    k.validate();
    if (!std::isfinite(charge_) || !is_finite(position_) || !is_finite(velocity_))
        throw std::invalid_argument("ElectronState: non-finite member");
    if (!(norm(velocity_) < k.c))
        throw std::invalid_argument("ElectronState: |v| must be below c");
}

Vec3 electron_e_field(const ElectronState& s, const Vec3& r, const PhysicalConstants& k,
                      ElectronFieldModel model, double cutoff) {
    const Vec3 R = separation_or_throw(s, r, cutoff);
    return e_field_impl(s, R, k, model);
}

Vec3 electron_b_field(const ElectronState& s, const Vec3& r, const PhysicalConstants& k,
                      ElectronFieldModel model, double cutoff) {
    const Vec3 R = separation_or_throw(s, r, cutoff);
    return cross(s.velocity / k.c, e_field_impl(s, R, k, model));
}

Vec3 electron_a_potential(const ElectronState& s, const Vec3& r, const PhysicalConstants& k,
                          double cutoff) {
    const Vec3 R = separation_or_throw(s, r, cutoff);
    return (s.charge / (k.c * norm(R))) * s.velocity;
}

double electron_flux_through_loop(const ElectronState& s, const LoopSpec& loop,
                                  const PhysicalConstants& k, const QuadratureSpec& spec,
                                  ElectronFieldModel model) {
    if (!(loop.radius > 0.0) || !std::isfinite(loop.radius))
        throw std::invalid_argument("electron_flux_through_loop: radius must be positive");
    const AxisFrame frame(loop.center, normalized(loop.axis));
    const double R = loop.radius;

    // Disc chart with uniform area density: s = R sqrt(u), phi = 2 pi v.
    const auto f = [&](double u, double v) {
        const double rad = R * std::sqrt(u);
        const double phi = 2.0 * M_PI * v;
        const Vec3 p = frame.from_local(rad * std::cos(phi), rad * std::sin(phi), 0.0);
        return dot(electron_b_field(s, p, k, model), frame.axis) * M_PI * R * R;
    };

    QuadratureSpec disc_spec = spec;
    disc_spec.abs_tol = 0.0;
    const IntegralResult r = integrate_unit_square(f, disc_spec);
    if (!r.converged)
        throw QuadratureError("electron_flux_through_loop: disc quadrature did not converge");
    return r.value;
}

ElectronState state_at(const Trajectory& traj, double charge, double t,
                       const PhysicalConstants& k) {
    if (!std::isfinite(t)) throw std::invalid_argument("state_at: non-finite time");

    if (const auto* line = std::get_if<StraightLine>(&traj)) {
        return ElectronState(charge, line->point0 + line->velocity * t, line->velocity, k);
    }

    if (const auto* arc = std::get_if<CircularArc>(&traj)) {
        if (!(arc->radius > 0.0) || !std::isfinite(arc->radius))
            throw std::invalid_argument("CircularArc: radius must be positive");
        if (!std::isfinite(arc->omega) || !std::isfinite(arc->phase0))
            throw std::invalid_argument("CircularArc: non-finite parameters");
        const AxisFrame frame(arc->center, normalized(arc->axis));
        const double ang = arc->phase0 + arc->omega * t;
        const Vec3 radial = frame.e1 * std::cos(ang) + frame.e2 * std::sin(ang);
        const Vec3 tangent = frame.e2 * std::cos(ang) - frame.e1 * std::sin(ang);
        return ElectronState(charge, frame.origin + radial * arc->radius,
                             tangent * (arc->omega * arc->radius), k);
    }

    const auto& path = std::get<PiecewiseLinear>(traj);
    if (path.points.size() < 2)
        throw std::invalid_argument("PiecewiseLinear: need at least 2 points");
    if (!(path.speed > 0.0) || !std::isfinite(path.speed))
        throw std::invalid_argument("PiecewiseLinear: speed must be positive");
    if (t < 0.0) throw std::out_of_range("PiecewiseLinear: t before traversal start");

    double travelled = path.speed * t;
    for (std::size_t i = 0; i + 1 < path.points.size(); ++i) {
        const Vec3 seg = path.points[i + 1] - path.points[i];
        const double len = norm(seg);
        if (len == 0.0)
            throw std::invalid_argument("PiecewiseLinear: consecutive points coincide");
        if (travelled <= len || i + 2 == path.points.size()) {
            if (travelled > len + 1e-12 * len)
                throw std::out_of_range("PiecewiseLinear: t past traversal end");
            const Vec3 dir = seg / len;
            return ElectronState(charge, path.points[i] + dir * travelled,
                                 dir * path.speed, k);
        }
        travelled -= len;
    }
    throw std::out_of_range("PiecewiseLinear: t past traversal end");
}

} // namespace abfield
