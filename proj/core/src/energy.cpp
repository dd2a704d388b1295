#include "abfield/energy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "abfield/compensated.hpp"

namespace abfield {

namespace {

// Per-thread memo of the source field over one operation: axisymmetry makes
// every (rho, z) pair shared across the azimuthal chart direction. Keys are
// exact bit patterns, so a hit returns the identical double and caching can
// never change a result, only its cost.
std::atomic<std::uint64_t> g_field_epoch{1};

std::uint64_t bits_of(double v) {
    std::uint64_t b;
    std::memcpy(&b, &v, sizeof b);
    return b;
}

struct PairKeyHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& p) const {
        std::uint64_t h = p.first * 0x9E3779B97F4A7C15ull;
        h ^= p.second + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

struct FieldMemo {
    std::uint64_t epoch = 0;
    std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, std::pair<double, double>,
                       PairKeyHash>
        map;
};

std::pair<double, double> cached_b0(const ExternalField& src, double rho, double z,
                                    const PhysicalConstants& k, const QuadratureSpec& spec,
                                    std::uint64_t epoch) {
    thread_local FieldMemo memo;
    if (memo.epoch != epoch) {
        memo.map.clear();
        memo.epoch = epoch;
    }
    const auto key = std::make_pair(bits_of(rho), bits_of(z));
    const auto it = memo.map.find(key);
    if (it != memo.map.end()) return it->second;
    double b_rho = 0.0, b_z = 0.0;
    b0_local(src, rho, z, k, spec, b_rho, b_z);
    const auto val = std::make_pair(b_rho, b_z);
    memo.map.emplace(key, val);
    return val;
}

// dz0 maps ref-frame axial coordinates into the source frame: z_src = z_ref + dz0.
bool coaxial(const AxisFrame& src, const AxisFrame& ref, double scale, double& dz0) {
    dz0 = 0.0;
    if (norm(cross(src.axis, ref.axis)) > 1e-12) return false;
    if (dot(src.axis, ref.axis) < 0.0) return false;
    const Vec3 d = ref.origin - src.origin;
    dz0 = dot(d, src.axis);
    return norm(d - src.axis * dz0) <= 1e-12 * std::max(scale, 1.0);
}

// Loose non-adaptive pass over |f| to anchor an absolute floor for signed
// integrands that can cancel to zero at isolated trajectory instants.
double gross_cube(const std::function<double(double, double, double)>& f,
                  const double (&scale)[3], const std::vector<double>& bu,
                  const std::vector<double>& bv, const std::vector<double>& bw) {
    QuadratureSpec probe;
    probe.rel_tol = 0.49;
    probe.abs_tol = 0.0;
    probe.max_subdivisions = 0;
    probe.base_order = 4;
    const auto mag = [&f](double u, double v, double w) { return std::fabs(f(u, v, w)); };
    return std::fabs(integrate_unit_cube(mag, probe, scale, bu, bv, bw).value);
}

struct CylinderChart {
    const CylinderRegion* region;
    double dz0 = 0.0; // region z -> source z shift (coaxial path only)
    bool coax = false;
    double scale[3] = {1.0, 1.0, 1.0};
    std::vector<double> breaks_rho, breaks_z;

    double radius() const { return region->radius; }
    double half() const { return region->half_length; }
    double rho_of(double u0) const { return region->radius * u0; }
    double z_of(double u2) const { return -region->half_length + 2.0 * region->half_length * u2; }
    double jacobian(double rho) const {
        return rho * region->radius * 2.0 * M_PI * 2.0 * region->half_length;
    }
    Vec3 point(double rho, double phi, double z) const {
        return region->frame.from_local(rho * std::cos(phi), rho * std::sin(phi), z);
    }
};

CylinderChart make_chart(const ExternalField& src, const CylinderRegion& region) {
    CylinderChart c;
    c.region = &region;
    c.coax = coaxial(src.frame(), region.frame, src.radius() + region.radius, c.dz0);
    c.scale[0] = region.radius;
    c.scale[1] = M_PI * region.radius;
    c.scale[2] = 2.0 * region.half_length;
    if (c.coax) {
        if (src.radius() < region.radius) c.breaks_rho.push_back(src.radius() / region.radius);
        if (!src.ideal_infinite()) {
            const double H = region.half_length;
            for (const double edge : {src.half_length() - c.dz0, -src.half_length() - c.dz0}) {
                const double u = (edge + H) / (2.0 * H);
                if (u > 0.0 && u < 1.0) c.breaks_z.push_back(u);
            }
        }
    }
    return c;
}

std::uint64_t next_epoch() { return g_field_epoch.fetch_add(1) + 1; }

} // namespace

EnergyLedger energy_ledger(const ExternalField& src, const ElectronState* electron,
                           const CylinderRegion& region, const PhysicalConstants& k,
                           const QuadratureSpec& spec, const EnergyOptions& options) {
    k.validate();
    spec.validate();
    if (!(options.self_exclusion_radius >= 0.0) || !std::isfinite(options.self_exclusion_radius))
        throw std::invalid_argument("energy_ledger: bad self_exclusion_radius");

    const std::uint64_t epoch = next_epoch();
    const CylinderChart chart = make_chart(src, region);
    const double sheet_k = src.sheet_current(k);

    EnergyLedger out;
    NeumaierSum err;
    QuadratureSpec term_spec = spec;
    term_spec.abs_tol = 0.0;

    if (options.with_external && sheet_k != 0.0) {
        IntegralResult r;
        if (chart.coax) {
            const auto density = [&](double rho, double z_reg) {
                const auto [br, bz] = cached_b0(src, rho, z_reg + chart.dz0, k, spec, epoch);
                return (br * br + bz * bz) / (8.0 * M_PI);
            };
            std::vector<double> rbr, zbr;
            if (src.radius() < region.radius) rbr.push_back(src.radius());
            if (!src.ideal_infinite()) {
                for (const double e : {src.half_length() - chart.dz0, -src.half_length() - chart.dz0})
                    if (e > -region.half_length && e < region.half_length) zbr.push_back(e);
            }
            r = integrate_axisymmetric(density, 0.0, region.radius, -region.half_length,
                                       region.half_length, term_spec, rbr, zbr);
        } else {
            const auto density = [&](const Vec3& p) {
                return norm2(b0_field(src, p, k, spec)) / (8.0 * M_PI);
            };
            r = volume_integral(density, region, term_spec);
        }
        out.term_external = r.value;
        err.add(r.error_estimate);
        out.converged = out.converged && r.converged;
    }

    if (electron && options.with_cross && sheet_k != 0.0) {
        const auto f = [&](double u0, double u1, double u2) {
            const double rho = chart.rho_of(u0);
            const double phi = 2.0 * M_PI * u1;
            const double z = chart.z_of(u2);
            const Vec3 p = chart.point(rho, phi, z);
            Vec3 b0;
            if (chart.coax) {
                const auto [br, bz] = cached_b0(src, rho, z + chart.dz0, k, spec, epoch);
                const Vec3 rho_hat =
                    region.frame.e1 * std::cos(phi) + region.frame.e2 * std::sin(phi);
                b0 = rho_hat * br + region.frame.axis * bz;
            } else {
                b0 = b0_field(src, p, k, spec);
            }
            const Vec3 be = electron_b_field(*electron, p, k, options.model);
            return dot(b0, be) / (4.0 * M_PI) * chart.jacobian(rho);
        };
        QuadratureSpec cross_spec = spec;
        cross_spec.abs_tol = std::max(
            spec.abs_tol, 1e-9 * gross_cube(f, chart.scale, chart.breaks_rho, {}, chart.breaks_z));
        const IntegralResult r = integrate_unit_cube(f, cross_spec, chart.scale,
                                                     chart.breaks_rho, {}, chart.breaks_z);
        out.term_cross = r.value;
        err.add(r.error_estimate);
        out.converged = out.converged && r.converged;
    }

    if (electron && options.with_self) {
        const double excl = (options.self_exclusion_radius > 0.0)
                                ? options.self_exclusion_radius
                                : 1e-3 * region.radius;
        const auto f = [&](double u0, double u1, double u2) {
            const double rho = chart.rho_of(u0);
            const double phi = 2.0 * M_PI * u1;
            const double z = chart.z_of(u2);
            const Vec3 p = chart.point(rho, phi, z);
            if (norm2(p - electron->position) < excl * excl) return 0.0;
            const Vec3 be = electron_b_field(*electron, p, k, options.model, 0.5 * excl);
            return norm2(be) / (8.0 * M_PI) * chart.jacobian(rho);
        };
        // Pin the electron's own coordinates so the exclusion ball lands on
        // cell boundaries when the charge sits inside the region.
        std::vector<double> rbr = chart.breaks_rho, zbr = chart.breaks_z;
        double erho, ephi, ez;
        region.frame.to_cylindrical(electron->position, erho, ephi, ez);
        if (erho < region.radius) rbr.push_back(erho / region.radius);
        if (std::fabs(ez) < region.half_length)
            zbr.push_back((ez + region.half_length) / (2.0 * region.half_length));
        const IntegralResult r = integrate_unit_cube(f, term_spec, chart.scale, rbr, {}, zbr);
        out.term_self = r.value;
        err.add(r.error_estimate);
        out.converged = out.converged && r.converged;
    }

    out.total = out.term_external + out.term_cross + out.term_self;
    out.error_estimate = err.value();
    return out;
}

BackReaction back_reaction(const ExternalField& src, const ElectronState& electron,
                           const PhysicalConstants& k, const QuadratureSpec& spec,
                           double ideal_linkage_half_length, double inductance_hint) {
    k.validate();
    spec.validate();

    BackReaction out;
    if (src.kind() != SourceKind::Solenoid) return out; // frozen kinematics

    out.applicable = true;
    const double a = src.radius();
    const double n = src.turns_per_cm();
    const double sheet_k = src.sheet_current(k);

    double half = src.half_length();
    if (src.ideal_infinite()) {
        if (!(ideal_linkage_half_length > 0.0) || !std::isfinite(ideal_linkage_half_length))
            throw std::invalid_argument(
                "back_reaction: ideal source needs a positive bookkeeping half-length");
        half = ideal_linkage_half_length;
    }

    // Per-turn electron flux integrated over the winding extent.
    QuadratureSpec link_spec = spec;
    link_spec.rel_tol = std::clamp(spec.rel_tol * 0.1, 1e-9, 1e-6);
    link_spec.abs_tol = 0.0;
    link_spec.max_subdivisions = std::max(spec.max_subdivisions, 20);

    const AxisFrame& fr = src.frame();
    const auto per_turn = [&](double z) {
        LoopSpec loop;
        loop.center = fr.origin + fr.axis * z;
        loop.axis = fr.axis;
        loop.radius = a;
        return electron_flux_through_loop(electron, loop, k, link_spec);
    };
    std::vector<double> breaks;
    const double ez = dot(electron.position - fr.origin, fr.axis);
    if (ez > -half && ez < half) breaks.push_back(ez);
    const IntegralResult omega = integrate_1d(per_turn, -half, half, link_spec, breaks);
    if (!omega.converged)
        throw QuadratureError("back_reaction: linkage quadrature did not converge");

    out.linked_flux = n * omega.value;
    out.delta_term_external = -(sheet_k / k.c) * omega.value;

    if (!src.ideal_infinite()) {
        const double L = (inductance_hint > 0.0) ? inductance_hint
                                                 : self_inductance(src, k, spec);
        out.inductance = L;
        out.delta_I = -out.linked_flux / (k.c * L);
        out.delta_b0_inside = 4.0 * M_PI * n * out.delta_I / k.c;
        out.conservation_residual = std::fabs(k.c * L * out.delta_I + out.linked_flux);
    }
    return out;
}

CancellationReport cancellation_sweep(const ExternalField& prototype, const Trajectory& traj,
                                      double charge, const CancellationSettings& settings,
                                      const PhysicalConstants& k, const QuadratureSpec& spec) {
    k.validate();
    spec.validate();
    if (prototype.kind() != SourceKind::Solenoid || prototype.ideal_infinite())
        throw std::invalid_argument("cancellation_sweep: needs a finite solenoid prototype");
    if (prototype.current() == 0.0)
        throw std::invalid_argument("cancellation_sweep: prototype current must be nonzero");
    if (settings.lengths.empty() || settings.times.empty())
        throw std::invalid_argument("cancellation_sweep: empty lengths or times");
    if (!(settings.region_radius_over_a > 0.0) || !(settings.region_half_length_multiple > 0.0))
        throw std::invalid_argument("cancellation_sweep: region factors must be positive");

    const double a = prototype.radius();
    const double n = prototype.turns_per_cm();
    const double current = prototype.current();
    const AxisFrame& fr = prototype.frame();

    CancellationReport report;
    for (const double length : settings.lengths) {
        if (!(length > 0.0) || !std::isfinite(length))
            throw std::invalid_argument("cancellation_sweep: bad length");

        SolenoidSource s;
        s.radius = a;
        s.length = length;
        s.turns_per_cm = n;
        s.current = current;
        s.placement = {fr.origin, fr.axis};
        const ExternalField src(s);
        const CylinderRegion region(fr.origin, fr.axis, settings.region_radius_over_a * a,
                                    settings.region_half_length_multiple * 0.5 * length);

        const double inductance = self_inductance(src, k, spec);

        EnergyOptions base_opt;
        base_opt.with_cross = false;
        base_opt.with_self = false;
        const EnergyLedger base = energy_ledger(src, nullptr, region, k, spec, base_opt);
        if (!base.converged)
            throw QuadratureError("cancellation_sweep: baseline energy did not converge");

        CancellationSample sample;
        sample.aspect = a / length;
        for (const double t : settings.times) {
            const ElectronState state = state_at(traj, charge, t, k);
            EnergyOptions cross_opt;
            cross_opt.with_external = false;
            cross_opt.with_self = false;
            const EnergyLedger ledger = energy_ledger(src, &state, region, k, spec, cross_opt);
            if (!ledger.converged)
                throw QuadratureError("cancellation_sweep: cross term did not converge");
            const BackReaction br = back_reaction(src, state, k, spec, -1.0, inductance);

            const double rel = br.delta_I / current;
            const double delta_external = base.term_external * ((1.0 + rel) * (1.0 + rel) - 1.0);
            sample.max_cross = std::max(sample.max_cross, std::fabs(ledger.term_cross));
            sample.max_residual =
                std::max(sample.max_residual, std::fabs(delta_external + ledger.term_cross));
        }
        if (sample.max_cross == 0.0)
            throw std::invalid_argument("cancellation_sweep: degenerate sweep, cross term is 0");
        sample.ratio = sample.max_residual / sample.max_cross;
        report.samples.push_back(sample);
        report.fit.samples.emplace_back(sample.aspect, sample.ratio);
    }

    if (report.samples.size() >= 3) {
        const auto pairs = report.fit.samples;
        report.fit = power_law_fit(pairs);
    }
    return report;
}

namespace {

// Panel-wise Poynting integrals with the source field evaluated through the
// axisymmetric memo: chart coordinates give exact (rho, z) keys, so the wall
// reuses one rho for every azimuth.
struct PanelChart {
    int panel = 0;
    const OrientedSurface* surface = nullptr;
    bool coax = false;
    double dz0 = 0.0;
    double scale[3] = {1.0, 1.0, 1.0}; // third direction unused (2D via cube w-collapse)

    void local_cyl(double u, double v, double& rho, double& z_surf, double& phi) const {
        const double r0 = surface->dim0();
        const double h = surface->dim1();
        if (surface->kind() == OrientedSurface::Kind::Torus) {
            const double alpha = 2.0 * M_PI * v;
            rho = r0 + h * std::cos(alpha); // dim1 is the minor radius here
            z_surf = h * std::sin(alpha);
            phi = 2.0 * M_PI * u;
            return;
        }
        if (panel == 0) {
            rho = r0;
            z_surf = -h + 2.0 * h * v;
            phi = 2.0 * M_PI * u;
            return;
        }
        rho = r0 * std::sqrt(u);
        z_surf = (panel == 1) ? h : -h;
        phi = 2.0 * M_PI * v;
    }
};

enum class RateKind { Full, Reduced, Cross };

} // namespace

PoyntingReport poynting_rate(const ExternalField& src, const ElectronState& electron,
                             const OrientedSurface& surface, const PhysicalConstants& k,
                             const QuadratureSpec& spec, ElectronFieldModel model) {
    k.validate();
    spec.validate();
    const std::uint64_t epoch = next_epoch();

    PanelChart chart;
    chart.surface = &surface;
    chart.coax = coaxial(src.frame(), surface.frame(), src.radius() + surface.dim0(), chart.dz0);

    PoyntingReport out;
    NeumaierSum vals[3], errs[3];
    const double prefactor = k.c / (4.0 * M_PI);

    for (int panel = 0; panel < surface.panel_count(); ++panel) {
        chart.panel = panel;

        const auto b0_at = [&](double u, double v, const Vec3& p) -> Vec3 {
            if (!chart.coax) return b0_field(src, p, k, spec);
            double rho, z_surf, phi;
            chart.local_cyl(u, v, rho, z_surf, phi);
            const auto [br, bz] = cached_b0(src, rho, z_surf + chart.dz0, k, spec, epoch);
            const AxisFrame& fr = surface.frame();
            const Vec3 rho_hat = fr.e1 * std::cos(phi) + fr.e2 * std::sin(phi);
            return rho_hat * br + fr.axis * bz;
        };

        const auto integrand = [&](RateKind kind, double u, double v) {
            const SurfaceSample s = surface.sample(panel, u, v);
            const Vec3 e = electron_e_field(electron, s.point, k, model);
            Vec3 b{};
            switch (kind) {
                case RateKind::Full:
                    b = b0_at(u, v, s.point) + electron_b_field(electron, s.point, k, model);
                    break;
                case RateKind::Reduced:
                    b = electron_b_field(electron, s.point, k, model);
                    break;
                case RateKind::Cross:
                    b = b0_at(u, v, s.point);
                    break;
            }
            return prefactor * dot(cross(e, b), s.normal_inward) * s.area_weight;
        };

        // Wall panel: pin the source edges onto the axial (v) grid.
        std::vector<double> breaks_v;
        if (panel == 0 && surface.kind() == OrientedSurface::Kind::CylinderWithCaps &&
            chart.coax && !src.ideal_infinite()) {
            const double h = surface.dim1();
            for (const double edge : {src.half_length() - chart.dz0, -src.half_length() - chart.dz0}) {
                const double vpos = (edge + h) / (2.0 * h);
                if (vpos > 0.0 && vpos < 1.0) breaks_v.push_back(vpos);
            }
        }

        for (const RateKind kind : {RateKind::Full, RateKind::Reduced, RateKind::Cross}) {
            const auto f = [&](double u, double v) { return integrand(kind, u, v); };

            // Coarse anchor so a rate passing through zero mid-flyby cannot
            // demand unbounded refinement from a purely relative tolerance.
            double gross = 0.0;
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j)
                    gross = std::max(gross, std::fabs(f((i + 0.5) / 8.0, (j + 0.5) / 8.0)));

            // 1e-9 of the coarse anchor matches the volume-term floor above
            // and is about the deepest certifiable resolution for a rate
            // whose lobes cancel; below it the error estimate stalls while
            // the value itself is long since settled.
            QuadratureSpec panel_spec = spec;
            panel_spec.abs_tol =
                std::max(spec.abs_tol / surface.panel_count(), 1e-9 * gross);
            const IntegralResult r = integrate_unit_square(f, panel_spec, {}, breaks_v);
            const int slot = static_cast<int>(kind);
            vals[slot].add(r.value);
            errs[slot].add(r.error_estimate);
            out.converged = out.converged && r.converged;
        }
    }

    out.rate_full = vals[0].value();
    out.rate_reduced = vals[1].value();
    out.cross_surface = vals[2].value();
    out.error_full = errs[0].value();
    out.error_reduced = errs[1].value();
    out.error_cross = errs[2].value();
    out.error_estimate = out.error_full + out.error_reduced + out.error_cross;
    return out;
}

double flux_independence_check(const ExternalField& src1, const ExternalField& src2,
                               const Trajectory& traj, double charge,
                               const std::vector<double>& times, const OrientedSurface& surface,
                               const PhysicalConstants& k, const QuadratureSpec& spec) {
    if (times.empty()) throw std::invalid_argument("flux_independence_check: empty times");

    double max_dev = 0.0;
    double max_rate = 0.0;
    for (const double t : times) {
        const ElectronState state = state_at(traj, charge, t, k);
        const PoyntingReport r1 = poynting_rate(src1, state, surface, k, spec);
        const PoyntingReport r2 = poynting_rate(src2, state, surface, k, spec);
        if (!r1.converged || !r2.converged)
            throw QuadratureError("flux_independence_check: rate quadrature did not converge");
        max_dev = std::max(max_dev, std::fabs(r1.rate_full - r2.rate_full));
        max_rate = std::max(max_rate, std::fabs(r1.rate_full));
    }
    return max_dev / std::max(max_rate, spec.abs_tol);
}

} // namespace abfield
