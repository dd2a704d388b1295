#include "abfield/phase.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "abfield/compensated.hpp"

namespace abfield {

namespace {

void require_path(const BeamPath& path, const char* what) {
    if (path.points.size() < 2)
        throw std::invalid_argument(std::string(what) + ": need at least 2 points");
    for (const Vec3& p : path.points)
        if (!is_finite(p)) throw std::invalid_argument(std::string(what) + ": non-finite point");
}

double path_extent(const BeamPath& a, const BeamPath& b) {
    double ext = 0.0;
    for (const Vec3& p : a.points) ext = std::max(ext, norm(p));
    for (const Vec3& p : b.points) ext = std::max(ext, norm(p));
    return std::max(ext, 1.0);
}

} // namespace

double path_phase(const VectorPotential& a, const BeamPath& path, const PhysicalConstants& k,
                  const QuadratureSpec& spec) {
    require_path(path, "path_phase");
    k.validate();
    spec.validate();

    NeumaierSum line_integral;
    for (std::size_t i = 0; i + 1 < path.points.size(); ++i) {
        const Vec3 p0 = path.points[i];
        const Vec3 d = path.points[i + 1] - p0;
        if (norm2(d) == 0.0)
            throw std::invalid_argument("path_phase: consecutive points coincide");
        const auto f = [&](double t) { return dot(a(p0 + d * t), d); };

        // A segment crossing a symmetry plane can integrate to ~0; anchor an
        // absolute floor on a coarse magnitude sample so the relative target
        // stays reachable.
        double gross = 0.0;
        for (int j = 0; j < 8; ++j) gross = std::max(gross, std::fabs(f((j + 0.5) / 8.0)));
        QuadratureSpec seg_spec = spec;
        seg_spec.abs_tol = std::max(spec.abs_tol, 1e-12 * gross);

        const IntegralResult r = integrate_1d(f, 0.0, 1.0, seg_spec);
        if (!r.converged)
            throw QuadratureError("path_phase: segment quadrature did not converge");
        line_integral.add(r.value);
    }
    return k.phase_per_flux() * line_integral.value();
}

PhaseResult relative_phase(const VectorPotential& a, const AxisFrame& axis, const BeamPath& arm1,
                           const BeamPath& arm2, double phase_offset, const PhysicalConstants& k,
                           const QuadratureSpec& spec) {
    require_path(arm1, "relative_phase arm1");
    require_path(arm2, "relative_phase arm2");
    if (!std::isfinite(phase_offset))
        throw std::invalid_argument("relative_phase: non-finite phase offset");

    const double scale = path_extent(arm1, arm2);
    if (norm(arm1.points.front() - arm2.points.front()) > 1e-9 * scale ||
        norm(arm1.points.back() - arm2.points.back()) > 1e-9 * scale)
        throw std::invalid_argument("relative_phase: arms must share source and screen points");

    PhaseResult out;
    out.phase_offset = phase_offset;
    out.slope = k.phase_per_flux();
    out.phase = phase_offset + path_phase(a, arm1, k, spec) - path_phase(a, arm2, k, spec);

    // Winding of the closed loop arm1 + reversed arm2, from wrapped
    // azimuthal increments about the reference axis.
    std::vector<Vec3> loop = arm1.points;
    for (std::size_t i = arm2.points.size() - 1; i-- > 0;) loop.push_back(arm2.points[i]);

    double total = 0.0;
    double prev_phi = 0.0;
    bool have_prev = false;
    for (const Vec3& p : loop) {
        const Vec3 d = p - axis.origin;
        const double x = dot(d, axis.e1);
        const double y = dot(d, axis.e2);
        if (std::hypot(x, y) < 1e-12 * scale)
            throw std::invalid_argument("relative_phase: path touches the reference axis");
        const double phi = std::atan2(y, x);
        if (have_prev) {
            double dphi = phi - prev_phi;
            while (dphi > M_PI) dphi -= 2.0 * M_PI;
            while (dphi < -M_PI) dphi += 2.0 * M_PI;
            total += dphi;
        }
        prev_phi = phi;
        have_prev = true;
    }
    out.winding = total / (2.0 * M_PI);
    out.unit_winding = std::fabs(std::fabs(out.winding) - 1.0) < 1e-6;
    return out;
}

VectorPotential gauge_shifted(VectorPotential base, std::function<double(const Vec3&)> chi,
                              double step) {
    if (!(step > 0.0) || !std::isfinite(step))
        throw std::invalid_argument("gauge_shifted: step must be positive and finite");
    return [base = std::move(base), chi = std::move(chi), step](const Vec3& r) {
        const Vec3 grad{
            (chi({r.x + step, r.y, r.z}) - chi({r.x - step, r.y, r.z})) / (2.0 * step),
            (chi({r.x, r.y + step, r.z}) - chi({r.x, r.y - step, r.z})) / (2.0 * step),
            (chi({r.x, r.y, r.z + step}) - chi({r.x, r.y, r.z - step})) / (2.0 * step)};
        return base(r) + grad;
    };
}

std::vector<std::pair<double, double>> fringe_pattern(double phase, double spacing, double x0,
                                                      double x1, int samples) {
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw std::invalid_argument("fringe_pattern: spacing must be positive");
    if (!std::isfinite(phase) || !std::isfinite(x0) || !std::isfinite(x1) || !(x1 > x0))
        throw std::invalid_argument("fringe_pattern: bad screen window");
    if (samples < 2) throw std::invalid_argument("fringe_pattern: need at least 2 samples");

    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const double x = x0 + (x1 - x0) * i / (samples - 1);
        out.emplace_back(x, 1.0 + std::cos(2.0 * M_PI * x / spacing + phase));
    }
    return out;
}

} // namespace abfield
