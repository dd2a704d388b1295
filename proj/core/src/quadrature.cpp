#include "abfield/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <queue>
#include <stdexcept>

#include "abfield/compensated.hpp"
#include "abfield/parallel.hpp"

namespace abfield {

void QuadratureSpec::validate() const {
    if (!(rel_tol > 0.0) || !std::isfinite(rel_tol) || rel_tol > 0.5)
        throw std::invalid_argument("QuadratureSpec: rel_tol must be in (0, 0.5]");
    if (!(abs_tol >= 0.0) || !std::isfinite(abs_tol))
        throw std::invalid_argument("QuadratureSpec: abs_tol must be >= 0 and finite");
    if (max_subdivisions < 0 || max_subdivisions > 60)
        throw std::invalid_argument("QuadratureSpec: max_subdivisions must be in [0, 60]");
    if (base_order < 2 || base_order > 32)
        throw std::invalid_argument("QuadratureSpec: base_order must be in [2, 32]");
}

namespace {

struct GlRule {
    std::vector<double> x; // nodes on [0, 1]
    std::vector<double> w; // weights summing to 1
};

// Nodes by Newton iteration on Legendre polynomials; cached per order.
const GlRule& gl_rule(int n) {
    static std::mutex mu;
    static std::map<int, GlRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GlRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double p1 = 1.0, dp = 1.0;
        for (int iter = 0; iter < 64; ++iter) {
            p1 = 1.0;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * x * p2 - j * p3) / (j + 1.0);
            }
            dp = n * (x * p1 - p2) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        const double w = 1.0 / ((1.0 - x * x) * dp * dp);
        r.x[i] = 0.5 * (1.0 - x);
        r.w[i] = w;
        r.x[n - 1 - i] = 0.5 * (1.0 + x);
        r.w[n - 1 - i] = w;
    }
    return cache.emplace(n, std::move(r)).first->second;
}

constexpr int kMaxDim = 3;
constexpr std::size_t kMaxCells = 300000;

struct Cell {
    double lo[kMaxDim] = {0, 0, 0};
    double size[kMaxDim] = {1, 1, 1};
    int depth[kMaxDim] = {0, 0, 0};
    double value = 0.0;
    double err = 0.0;
    bool alive = true;
};

// Integrand over the unit cube; F already folds in the coordinate map and
// Jacobian. `scale` carries physical extents for the split heuristic.
struct Chart {
    int dim = 1;
    std::function<double(const double*)> F;
    double scale[kMaxDim] = {1, 1, 1};
    std::vector<double> breaks[kMaxDim]; // interior break positions in (0, 1)
};

void eval_cell(const Chart& chart, const QuadratureSpec& spec, Cell& cell, long& evals) {
    const int d = chart.dim;
    const int n1 = spec.base_order;
    const int n2 = 2 * spec.base_order;
    const GlRule& r1 = gl_rule(n1);
    const GlRule& r2 = gl_rule(n2);

    std::size_t c1 = 1, c2 = 1;
    for (int k = 0; k < d; ++k) {
        c1 *= static_cast<std::size_t>(n1);
        c2 *= static_cast<std::size_t>(n2);
    }
    const std::size_t total = c1 + c2;
    std::vector<double> vals(total);

    parallel_apply(total, [&](std::size_t i) {
        double u[kMaxDim] = {0, 0, 0};
        std::size_t idx = i;
        const GlRule& r = (i < c1) ? r1 : r2;
        const int n = (i < c1) ? n1 : n2;
        if (i >= c1) idx -= c1;
        for (int k = 0; k < d; ++k) {
            u[k] = cell.lo[k] + cell.size[k] * r.x[idx % n];
            idx /= static_cast<std::size_t>(n);
        }
        vals[i] = chart.F(u);
    });
    evals += static_cast<long>(total);

    double volume = 1.0;
    for (int k = 0; k < d; ++k) volume *= cell.size[k];

    NeumaierSum s1, s2;
    for (std::size_t i = 0; i < c1; ++i) {
        if (!std::isfinite(vals[i]))
            throw std::domain_error("quadrature: non-finite integrand sample");
        std::size_t idx = i;
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
            w *= r1.w[idx % n1];
            idx /= static_cast<std::size_t>(n1);
        }
        s1.add(vals[i] * w);
    }
    for (std::size_t i = 0; i < c2; ++i) {
        const double v = vals[c1 + i];
        if (!std::isfinite(v))
            throw std::domain_error("quadrature: non-finite integrand sample");
        std::size_t idx = i;
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
            w *= r2.w[idx % n2];
            idx /= static_cast<std::size_t>(n2);
        }
        s2.add(v * w);
    }

    const double coarse = s1.value() * volume;
    const double fine = s2.value() * volume;
    cell.value = fine;
    cell.err = std::fabs(fine - coarse);
}

int pick_split_dim(const Chart& chart, const QuadratureSpec& spec, const Cell& cell) {
    int best = -1;
    double best_extent = -1.0;
    for (int k = 0; k < chart.dim; ++k) {
        if (cell.depth[k] >= spec.max_subdivisions) continue;
        const double extent = cell.size[k] * chart.scale[k];
        if (extent > best_extent) {
            best_extent = extent;
            best = k;
        }
    }
    return best;
}

IntegralResult adapt_engine(const Chart& chart, const QuadratureSpec& spec) {
    spec.validate();

    std::vector<double> edges[kMaxDim];
    std::size_t initial = 1;
    for (int k = 0; k < chart.dim; ++k) {
        auto& e = edges[k];
        e.push_back(0.0);
        for (double b : chart.breaks[k])
            if (b > 1e-12 && b < 1.0 - 1e-12) e.push_back(b);
        e.push_back(1.0);
        std::sort(e.begin(), e.end());
        e.erase(std::unique(e.begin(), e.end(),
                            [](double a, double b) { return std::fabs(a - b) < 1e-12; }),
                e.end());
        initial *= e.size() - 1;
    }

    std::vector<Cell> cells;
    cells.reserve(initial * 4);
    long evals = 0;

    // Initial grid in lexicographic order.
    std::size_t counts[kMaxDim] = {1, 1, 1};
    for (int k = 0; k < chart.dim; ++k) counts[k] = edges[k].size() - 1;
    for (std::size_t flat = 0; flat < initial; ++flat) {
        std::size_t idx = flat;
        Cell c;
        for (int k = 0; k < chart.dim; ++k) {
            const std::size_t j = idx % counts[k];
            idx /= counts[k];
            c.lo[k] = edges[k][j];
            c.size[k] = edges[k][j + 1] - edges[k][j];
        }
        eval_cell(chart, spec, c, evals);
        cells.push_back(c);
    }

    struct HeapEntry {
        double err;
        std::size_t idx;
        bool operator<(const HeapEntry& o) const {
            if (err != o.err) return err < o.err;
            return idx > o.idx; // ties: older cell first
        }
    };
    std::priority_queue<HeapEntry> heap;

    double val_sum = 0.0, err_sum = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        val_sum += cells[i].value;
        err_sum += cells[i].err;
        if (pick_split_dim(chart, spec, cells[i]) >= 0) heap.push({cells[i].err, i});
    }

    while (!heap.empty() && cells.size() < kMaxCells) {
        const double tol = std::max(spec.rel_tol * std::fabs(val_sum), spec.abs_tol);
        if (err_sum <= tol) break;

        const HeapEntry top = heap.top();
        heap.pop();
        Cell& parent = cells[top.idx];
        if (!parent.alive) continue;
        const int dim = pick_split_dim(chart, spec, parent);
        if (dim < 0) continue;

        Cell a = parent, b = parent;
        a.size[dim] *= 0.5;
        b.size[dim] *= 0.5;
        b.lo[dim] += a.size[dim];
        a.depth[dim]++;
        b.depth[dim]++;
        a.alive = b.alive = true;
        eval_cell(chart, spec, a, evals);
        eval_cell(chart, spec, b, evals);

        parent.alive = false;
        val_sum += a.value + b.value - parent.value;
        err_sum += a.err + b.err - parent.err;

        const std::size_t ia = cells.size();
        cells.push_back(a);
        const std::size_t ib = cells.size();
        cells.push_back(b);
        if (pick_split_dim(chart, spec, cells[ia]) >= 0) heap.push({cells[ia].err, ia});
        if (pick_split_dim(chart, spec, cells[ib]) >= 0) heap.push({cells[ib].err, ib});
    }

    // Final reduction in creation order; running sums were control only.
    NeumaierSum vs, es;
    for (const Cell& c : cells) {
        if (!c.alive) continue;
        vs.add(c.value);
        es.add(c.err);
    }
    IntegralResult result;
    result.value = vs.value();
    result.error_estimate = es.value();
    result.evaluations = evals;
    result.converged = result.error_estimate <=
                       std::max(spec.rel_tol * std::fabs(result.value), spec.abs_tol);
    return result;
}

std::vector<double> to_unit_breaks(const std::vector<double>& physical, double lo, double hi) {
    std::vector<double> out;
    if (hi <= lo) return out;
    for (double b : physical) {
        const double u = (b - lo) / (hi - lo);
        if (u > 0.0 && u < 1.0) out.push_back(u);
    }
    return out;
}

} // namespace

IntegralResult integrate_1d(const std::function<double(double)>& f,
                            double a, double b, const QuadratureSpec& spec,
                            const std::vector<double>& breaks) {
    if (!(std::isfinite(a) && std::isfinite(b)))
        throw std::invalid_argument("integrate_1d: non-finite interval");
    if (a == b) return {0.0, 0.0, 0, true};

    Chart chart;
    chart.dim = 1;
    chart.scale[0] = std::fabs(b - a);
    chart.breaks[0] = to_unit_breaks(breaks, a, b);
    const double len = b - a;
    chart.F = [&f, a, len](const double* u) { return f(a + len * u[0]) * len; };
    return adapt_engine(chart, spec);
}

IntegralResult volume_integral(const std::function<double(const Vec3&)>& f,
                               const CylinderRegion& region, const QuadratureSpec& spec,
                               const std::vector<double>& radial_breaks,
                               const std::vector<double>& axial_breaks) {
    const double R = region.radius;
    const double H = region.half_length;
    Chart chart;
    chart.dim = 3;
    chart.scale[0] = R;
    chart.scale[1] = M_PI * R;
    chart.scale[2] = 2.0 * H;
    chart.breaks[0] = to_unit_breaks(radial_breaks, 0.0, R);
    chart.breaks[2] = to_unit_breaks(axial_breaks, -H, H);
    const AxisFrame frame = region.frame;
    chart.F = [&f, frame, R, H](const double* u) {
        const double rho = R * u[0];
        const double phi = 2.0 * M_PI * u[1];
        const double z = -H + 2.0 * H * u[2];
        const Vec3 p = frame.from_local(rho * std::cos(phi), rho * std::sin(phi), z);
        return f(p) * rho * R * 2.0 * M_PI * 2.0 * H;
    };
    return adapt_engine(chart, spec);
}

IntegralResult volume_integral(const std::function<double(const Vec3&)>& f,
                               const TorusRegion& region, const QuadratureSpec& spec) {
    const double R = region.major_radius;
    const double r = region.minor_radius;
    Chart chart;
    chart.dim = 3;
    chart.scale[0] = r;
    chart.scale[1] = M_PI * r;
    chart.scale[2] = M_PI * R;
    const AxisFrame frame = region.frame;
    chart.F = [&f, frame, R, r](const double* u) {
        const double s = r * u[0];
        const double theta = 2.0 * M_PI * u[1];
        const double phi = 2.0 * M_PI * u[2];
        const double arm = R + s * std::cos(theta);
        const Vec3 p = frame.from_local(arm * std::cos(phi), arm * std::sin(phi),
                                        s * std::sin(theta));
        return f(p) * s * arm * r * 4.0 * M_PI * M_PI;
    };
    return adapt_engine(chart, spec);
}

IntegralResult integrate_axisymmetric(const std::function<double(double, double)>& f,
                                      double rho0, double rho1, double z0, double z1,
                                      const QuadratureSpec& spec,
                                      const std::vector<double>& radial_breaks,
                                      const std::vector<double>& axial_breaks) {
    if (!(rho1 > rho0) || !(z1 > z0) || rho0 < 0.0)
        throw std::invalid_argument("integrate_axisymmetric: bad domain");
    Chart chart;
    chart.dim = 2;
    chart.scale[0] = rho1 - rho0;
    chart.scale[1] = z1 - z0;
    chart.breaks[0] = to_unit_breaks(radial_breaks, rho0, rho1);
    chart.breaks[1] = to_unit_breaks(axial_breaks, z0, z1);
    chart.F = [&f, rho0, rho1, z0, z1](const double* u) {
        const double rho = rho0 + (rho1 - rho0) * u[0];
        const double z = z0 + (z1 - z0) * u[1];
        return f(rho, z) * 2.0 * M_PI * rho * (rho1 - rho0) * (z1 - z0);
    };
    return adapt_engine(chart, spec);
}

IntegralResult integrate_unit_square(const std::function<double(double, double)>& f,
                                     const QuadratureSpec& spec,
                                     const std::vector<double>& breaks_u,
                                     const std::vector<double>& breaks_v) {
    Chart chart;
    chart.dim = 2;
    chart.scale[0] = 1.0;
    chart.scale[1] = 1.0;
    chart.breaks[0] = to_unit_breaks(breaks_u, 0.0, 1.0);
    chart.breaks[1] = to_unit_breaks(breaks_v, 0.0, 1.0);
    chart.F = [&f](const double* u) { return f(u[0], u[1]); };
    return adapt_engine(chart, spec);
}

IntegralResult integrate_unit_cube(const std::function<double(double, double, double)>& f,
                                   const QuadratureSpec& spec,
                                   const double (&scale)[3],
                                   const std::vector<double>& breaks_u,
                                   const std::vector<double>& breaks_v,
                                   const std::vector<double>& breaks_w) {
    Chart chart;
    chart.dim = 3;
    for (int k = 0; k < 3; ++k) {
        if (!(scale[k] > 0.0) || !std::isfinite(scale[k]))
            throw std::invalid_argument("integrate_unit_cube: scale must be positive");
        chart.scale[k] = scale[k];
    }
    chart.breaks[0] = to_unit_breaks(breaks_u, 0.0, 1.0);
    chart.breaks[1] = to_unit_breaks(breaks_v, 0.0, 1.0);
    chart.breaks[2] = to_unit_breaks(breaks_w, 0.0, 1.0);
    chart.F = [&f](const double* u) { return f(u[0], u[1], u[2]); };
    return adapt_engine(chart, spec);
}

IntegralResult surface_flux_integral(const std::function<Vec3(const Vec3&)>& field,
                                     const OrientedSurface& surface, const QuadratureSpec& spec,
                                     int panel,
                                     const std::vector<double>& wall_breaks) {
    const int first = (panel < 0) ? 0 : panel;
    const int last = (panel < 0) ? surface.panel_count() - 1 : panel;
    if (first >= surface.panel_count())
        throw std::invalid_argument("surface_flux_integral: panel out of range");

    const int panels = last - first + 1;
    QuadratureSpec panel_spec = spec;
    panel_spec.abs_tol = spec.abs_tol / panels;

    NeumaierSum vs, es;
    long evals = 0;
    bool converged = true;
    for (int p = first; p <= last; ++p) {
        Chart chart;
        chart.dim = 2;
        if (surface.kind() == OrientedSurface::Kind::Torus) {
            chart.scale[0] = 2.0 * M_PI * 1.0;
            chart.scale[1] = 1.0; // relative: major loop vs tube loop
        } else if (p == 0) {
            chart.scale[0] = 1.0;
            chart.scale[1] = 1.0;
            // Wall chart: u is azimuth, v is axial position.
            const SurfaceSample s0 = surface.sample(0, 0.0, 0.0);
            const SurfaceSample s1 = surface.sample(0, 0.0, 1.0);
            const double two_h = norm(s1.point - s0.point);
            const double circumference = s0.area_weight / std::max(two_h, 1e-300);
            chart.scale[0] = circumference;
            chart.scale[1] = two_h;
            if (!wall_breaks.empty()) {
                // wall_breaks are axial offsets from the surface center.
                std::vector<double> unit;
                for (double b : wall_breaks) unit.push_back(b / two_h + 0.5);
                chart.breaks[1] = to_unit_breaks(unit, 0.0, 1.0);
            }
        } else {
            chart.scale[0] = 1.0;
            chart.scale[1] = 2.0;
        }
        chart.F = [&field, &surface, p](const double* u) {
            const SurfaceSample s = surface.sample(p, u[0], u[1]);
            return dot(field(s.point), s.normal_inward) * s.area_weight;
        };
        const IntegralResult r = adapt_engine(chart, panel_spec);
        vs.add(r.value);
        es.add(r.error_estimate);
        evals += r.evaluations;
        converged = converged && r.converged;
    }

    IntegralResult result;
    result.value = vs.value();
    result.error_estimate = es.value();
    result.evaluations = evals;
    result.converged = converged;
    return result;
}

ScalingFit power_law_fit(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 3)
        throw std::invalid_argument("power_law_fit: need at least 3 samples");
    for (const auto& [x, y] : samples)
        if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
            throw std::invalid_argument("power_law_fit: samples must be positive and finite");

    const double n = static_cast<double>(samples.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : samples) {
        mx += std::log(x);
        my += std::log(y);
    }
    mx /= n;
    my /= n;

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : samples) {
        const double dx = std::log(x) - mx;
        const double dy = std::log(y) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("power_law_fit: degenerate abscissae");

    ScalingFit fit;
    fit.samples = samples;
    fit.exponent = sxy / sxx;
    fit.prefactor = std::exp(my - fit.exponent * mx);
    double ss_res = 0.0;
    for (const auto& [x, y] : samples) {
        const double pred = my + fit.exponent * (std::log(x) - mx);
        const double res = std::log(y) - pred;
        ss_res += res * res;
    }
    fit.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

} // namespace abfield
