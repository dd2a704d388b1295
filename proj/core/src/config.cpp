#include "abfield/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>
#include <system_error>

namespace abfield {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double_token(const std::string& tok, const std::string& key, int line) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(v))
        throw ConfigError(key + ": expected a finite number, got '" + tok + "'", line);
    return v;
}

long parse_int_token(const std::string& tok, const std::string& key, int line) {
    long v = 0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ConfigError(key + ": expected an integer, got '" + tok + "'", line);
    return v;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

struct RawEntry {
    std::string value;
    int line = 0;
};

using RawMap = std::map<std::string, RawEntry>;

void ingest_line(RawMap& raw, const std::string& content, int line, bool allow_overwrite) {
    std::string text = content;
    const auto hash = text.find('#');
    if (hash != std::string::npos) text.erase(hash);
    text = trim(text);
    if (text.empty()) return;

    const auto eq = text.find('=');
    if (eq == std::string::npos)
        throw ConfigError("expected 'section.key = value'", line);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty() || key.find('.') == std::string::npos)
        throw ConfigError("key must be of the form section.key", line);
    if (value.empty()) throw ConfigError(key + ": empty value", line);
    if (!allow_overwrite && raw.count(key))
        throw ConfigError(key + ": duplicate key (first given on line " +
                              std::to_string(raw[key].line) + ")",
                          line);
    raw[key] = {value, line};
}

// Pulls typed values out of the raw map and records which keys were touched.
struct Resolver {
    const RawMap& raw;
    std::vector<std::string> consumed;

    const RawEntry* find(const std::string& key) {
        consumed.push_back(key);
        const auto it = raw.find(key);
        return it == raw.end() ? nullptr : &it->second;
    }

    double number(const std::string& key, double fallback) {
        const RawEntry* e = find(key);
        return e ? parse_double_token(e->value, key, e->line) : fallback;
    }

    int integer(const std::string& key, int fallback) {
        const RawEntry* e = find(key);
        return e ? static_cast<int>(parse_int_token(e->value, key, e->line)) : fallback;
    }

    bool boolean(const std::string& key, bool fallback) {
        const RawEntry* e = find(key);
        if (!e) return fallback;
        if (e->value == "true") return true;
        if (e->value == "false") return false;
        throw ConfigError(key + ": expected true or false", e->line);
    }

    std::string token(const std::string& key, const std::string& fallback,
                      const std::vector<std::string>& allowed) {
        const RawEntry* e = find(key);
        const std::string v = e ? e->value : fallback;
        if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
            std::string msg = key + ": expected one of {";
            for (std::size_t i = 0; i < allowed.size(); ++i)
                msg += (i ? ", " : "") + allowed[i];
            throw ConfigError(msg + "}, got '" + v + "'", e ? e->line : 0);
        }
        return v;
    }

    Vec3 vector(const std::string& key, const Vec3& fallback) {
        const RawEntry* e = find(key);
        if (!e) return fallback;
        const auto toks = split_ws(e->value);
        if (toks.size() != 3)
            throw ConfigError(key + ": expected three numbers", e->line);
        return {parse_double_token(toks[0], key, e->line),
                parse_double_token(toks[1], key, e->line),
                parse_double_token(toks[2], key, e->line)};
    }

    SweepRange sweep(const std::string& key) {
        const RawEntry* e = find(key);
        if (!e) return {};
        const std::string& v = e->value;
        const auto c1 = v.find(':');
        const auto c2 = v.find(':', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw ConfigError(key + ": expected start:stop:count", e->line);
        SweepRange s;
        s.start = parse_double_token(trim(v.substr(0, c1)), key, e->line);
        s.stop = parse_double_token(trim(v.substr(c1 + 1, c2 - c1 - 1)), key, e->line);
        s.count = static_cast<int>(parse_int_token(trim(v.substr(c2 + 1)), key, e->line));
        if (s.count < 1) throw ConfigError(key + ": count must be >= 1", e->line);
        if (s.count > 100000) throw ConfigError(key + ": count too large", e->line);
        return s;
    }

    std::vector<double> number_list(const std::string& key, const std::vector<double>& fallback) {
        const RawEntry* e = find(key);
        if (!e) return fallback;
        std::vector<double> out;
        for (const auto& tok : split_ws(e->value))
            out.push_back(parse_double_token(tok, key, e->line));
        if (out.empty()) throw ConfigError(key + ": empty list", e->line);
        return out;
    }
};

void check(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg, 0);
}

} // namespace

std::vector<double> SweepRange::values() const {
    std::vector<double> out;
    if (count <= 0) return out;
    if (count == 1) {
        out.push_back(start);
        return out;
    }
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out.push_back(start + (stop - start) * i / (count - 1));
    return out;
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

namespace {

std::string format_vec(const Vec3& v) {
    return format_double(v.x) + " " + format_double(v.y) + " " + format_double(v.z);
}

std::string format_sweep(const SweepRange& s) {
    return format_double(s.start) + ":" + format_double(s.stop) + ":" + std::to_string(s.count);
}

std::string format_list(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? " " : "") + format_double(xs[i]);
    return out;
}

} // namespace

ScenarioConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
    RawMap raw;
    {
        std::istringstream in(text);
        std::string line;
        int number = 0;
        while (std::getline(in, line)) ingest_line(raw, line, ++number, false);
    }
    for (const auto& o : overrides) ingest_line(raw, o, 0, true);

    ScenarioConfig cfg;
    Resolver r{raw, {}};

    const std::string preset = r.token("constants.preset", "cgs", {"cgs", "natural"});
    cfg.natural_units = preset == "natural";
    cfg.constants = cfg.natural_units ? PhysicalConstants::natural() : PhysicalConstants::cgs();

    const std::string kind =
        r.token("source.kind", "solenoid", {"solenoid", "rotor", "whisker"});
    cfg.source_kind = kind == "solenoid"  ? SourceKind::Solenoid
                      : kind == "rotor"   ? SourceKind::Rotor
                                          : SourceKind::Whisker;
    cfg.ideal_infinite = r.boolean("source.ideal_infinite", false);
    cfg.source_radius = r.number("source.radius_cm", 1.0);
    cfg.source_length = r.number("source.length_cm", 100.0);
    cfg.turns_per_cm = r.number("source.turns_per_cm", 100.0);
    cfg.current = r.number("source.current_statA", 1.0);
    cfg.charge_density = r.number("source.charge_density_statC_cm2", 1.0);
    cfg.omega = r.number("source.omega_rad_s", 1.0);
    cfg.magnetization = r.number("source.magnetization_G", 1.0);
    cfg.source_center = r.vector("source.center_cm", {0.0, 0.0, 0.0});
    cfg.source_axis = r.vector("source.axis", {0.0, 0.0, 1.0});

    cfg.electron_charge = r.number("electron.charge_statC", -cfg.constants.e_charge);
    cfg.electron_speed =
        r.number("electron.speed_cm_s", cfg.natural_units ? 0.3 : 1e8);
    cfg.impact_parameter =
        r.number("electron.impact_parameter_cm", 3.0 * cfg.source_radius);
    cfg.field_model = r.token("electron.field_model", "quasi_static",
                              {"quasi_static", "boosted_coulomb"}) == "quasi_static"
                          ? ElectronFieldModel::QuasiStatic
                          : ElectronFieldModel::BoostedCoulomb;
    cfg.electron_cutoff = r.number("electron.cutoff_cm", 1e-9);

    cfg.region_torus = r.token("region.kind", "cylinder", {"cylinder", "torus"}) == "torus";
    cfg.region_radius_over_a =
        r.number("region.radius_over_a", cfg.ideal_infinite ? 1.0 : 1.05);
    cfg.region_half_length_multiple = r.number("region.half_length_multiple", 5.0);
    cfg.region_half_length = r.number("region.half_length_cm", 0.0);
    if (cfg.region_half_length == 0.0)
        cfg.region_half_length = cfg.ideal_infinite
                                     ? 25.0 * cfg.source_radius
                                     : cfg.region_half_length_multiple * 0.5 * cfg.source_length;
    cfg.torus_major = r.number("region.torus_major_cm", 3.0 * cfg.source_radius);
    cfg.torus_minor = r.number("region.torus_minor_cm", cfg.source_radius);

    cfg.quadrature.rel_tol = r.number("quadrature.rel_tol", 1e-6);
    cfg.quadrature.abs_tol = r.number("quadrature.abs_tol", 1e-12);
    cfg.quadrature.max_subdivisions = r.integer("quadrature.max_subdivisions", 12);
    cfg.quadrature.base_order = r.integer("quadrature.base_order", 8);

    cfg.times = r.sweep("sweep.times_s");
    cfg.flux_sweep = r.sweep("sweep.flux_G_cm2");
    cfg.lengths_over_a = r.number_list("scaling.lengths_over_a", {25.0, 50.0, 100.0, 200.0});
    cfg.loop_radius_over_a = r.number("phase.loop_radius_over_a", 3.0);
    cfg.points_per_path = r.integer("phase.points_per_path", 65);
    cfg.phase_offset = r.number("phase.phi0_rad", 0.0);

    cfg.fields_from = r.vector("fields.from_cm", {-3.0 * cfg.source_radius, 0.0, 0.0});
    cfg.fields_to = r.vector("fields.to_cm", {3.0 * cfg.source_radius, 0.0, 0.0});
    cfg.fields_samples = r.integer("fields.samples", 50);
    cfg.fields_time = r.number("fields.time_s", 0.0);

    // Unknown keys are errors, with the offending line.
    std::sort(r.consumed.begin(), r.consumed.end());
    for (const auto& [key, entry] : raw)
        if (!std::binary_search(r.consumed.begin(), r.consumed.end(), key))
            throw ConfigError(key + ": unknown key", entry.line);

    // Cross-field validation.
    check(cfg.source_radius > 0.0 && std::isfinite(cfg.source_radius),
          "source.radius_cm: must be positive");
    check(cfg.source_length > 0.0 && std::isfinite(cfg.source_length),
          "source.length_cm: must be positive");
    check(cfg.turns_per_cm > 0.0 && std::isfinite(cfg.turns_per_cm),
          "source.turns_per_cm: must be positive");
    check(std::isfinite(cfg.current) && std::isfinite(cfg.charge_density) &&
              std::isfinite(cfg.omega) && std::isfinite(cfg.magnetization),
          "source drive parameters must be finite");
    check(norm(cfg.source_axis) > 0.0, "source.axis: must be nonzero");
    cfg.source_axis = normalized(cfg.source_axis);

    check(std::isfinite(cfg.electron_charge), "electron.charge_statC: must be finite");
    check(cfg.electron_speed >= 0.0 && cfg.electron_speed < cfg.constants.c,
          "electron.speed_cm_s: must satisfy 0 <= v < c");
    check(cfg.electron_cutoff > 0.0, "electron.cutoff_cm: must be positive");
    check(cfg.region_radius_over_a > 0.0, "region.radius_over_a: must be positive");
    check(cfg.region_half_length_multiple > 0.0,
          "region.half_length_multiple: must be positive");
    check(cfg.region_half_length > 0.0, "region.half_length_cm: must be positive");
    if (cfg.region_torus) {
        check(cfg.torus_minor > 0.0 && cfg.torus_minor < cfg.torus_major,
              "region torus radii: need 0 < minor < major");
    } else {
        check(cfg.impact_parameter > cfg.region_radius_over_a * cfg.source_radius,
              "electron.impact_parameter_cm: flyby must clear the region radius");
    }
    check(cfg.loop_radius_over_a > 1.0,
          "phase.loop_radius_over_a: interferometer arms must clear the flux cylinder");
    check(cfg.points_per_path >= 3, "phase.points_per_path: need at least 3");
    check(cfg.fields_samples >= 2, "fields.samples: need at least 2");
    for (const double l : cfg.lengths_over_a)
        check(l > 0.0 && std::isfinite(l), "scaling.lengths_over_a: entries must be positive");
    try {
        cfg.quadrature.validate();
        cfg.constants.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what(), 0);
    }

    // Canonical resolved entries, the digest and serialization substrate.
    auto& m = cfg.entries;
    m["constants.preset"] = preset;
    m["source.kind"] = kind;
    m["source.ideal_infinite"] = cfg.ideal_infinite ? "true" : "false";
    m["source.radius_cm"] = format_double(cfg.source_radius);
    m["source.length_cm"] = format_double(cfg.source_length);
    m["source.turns_per_cm"] = format_double(cfg.turns_per_cm);
    m["source.current_statA"] = format_double(cfg.current);
    m["source.charge_density_statC_cm2"] = format_double(cfg.charge_density);
    m["source.omega_rad_s"] = format_double(cfg.omega);
    m["source.magnetization_G"] = format_double(cfg.magnetization);
    m["source.center_cm"] = format_vec(cfg.source_center);
    m["source.axis"] = format_vec(cfg.source_axis);
    m["electron.charge_statC"] = format_double(cfg.electron_charge);
    m["electron.speed_cm_s"] = format_double(cfg.electron_speed);
    m["electron.impact_parameter_cm"] = format_double(cfg.impact_parameter);
    m["electron.field_model"] =
        cfg.field_model == ElectronFieldModel::QuasiStatic ? "quasi_static" : "boosted_coulomb";
    m["electron.cutoff_cm"] = format_double(cfg.electron_cutoff);
    m["region.kind"] = cfg.region_torus ? "torus" : "cylinder";
    m["region.radius_over_a"] = format_double(cfg.region_radius_over_a);
    m["region.half_length_multiple"] = format_double(cfg.region_half_length_multiple);
    m["region.half_length_cm"] = format_double(cfg.region_half_length);
    m["region.torus_major_cm"] = format_double(cfg.torus_major);
    m["region.torus_minor_cm"] = format_double(cfg.torus_minor);
    m["quadrature.rel_tol"] = format_double(cfg.quadrature.rel_tol);
    m["quadrature.abs_tol"] = format_double(cfg.quadrature.abs_tol);
    m["quadrature.max_subdivisions"] = std::to_string(cfg.quadrature.max_subdivisions);
    m["quadrature.base_order"] = std::to_string(cfg.quadrature.base_order);
    if (cfg.times.set()) m["sweep.times_s"] = format_sweep(cfg.times);
    if (cfg.flux_sweep.set()) m["sweep.flux_G_cm2"] = format_sweep(cfg.flux_sweep);
    m["scaling.lengths_over_a"] = format_list(cfg.lengths_over_a);
    m["phase.loop_radius_over_a"] = format_double(cfg.loop_radius_over_a);
    m["phase.points_per_path"] = std::to_string(cfg.points_per_path);
    m["phase.phi0_rad"] = format_double(cfg.phase_offset);
    m["fields.from_cm"] = format_vec(cfg.fields_from);
    m["fields.to_cm"] = format_vec(cfg.fields_to);
    m["fields.samples"] = std::to_string(cfg.fields_samples);
    m["fields.time_s"] = format_double(cfg.fields_time);
    return cfg;
}

std::string serialize(const ScenarioConfig& cfg) {
    std::string out;
    for (const auto& [key, value] : cfg.entries) out += key + " = " + value + "\n";
    return out;
}

std::uint64_t config_digest(const ScenarioConfig& cfg) {
    std::uint64_t h = 14695981039346656037ull;
    const auto mix = [&h](const std::string& s) {
        for (const unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    for (const auto& [key, value] : cfg.entries) {
        mix(key);
        mix("=");
        mix(value);
        mix("\n");
    }
    return h;
}

std::string digest_hex(std::uint64_t digest) {
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[digest & 0xF];
        digest >>= 4;
    }
    return out;
}

ExternalField ScenarioConfig::make_source() const {
    Placement place{source_center, source_axis};
    switch (source_kind) {
        case SourceKind::Solenoid: {
            SolenoidSource s;
            s.radius = source_radius;
            s.length = source_length;
            s.turns_per_cm = turns_per_cm;
            s.current = current;
            s.placement = place;
            return ExternalField(s, ideal_infinite);
        }
        case SourceKind::Rotor: {
            RotorSource s;
            s.radius = source_radius;
            s.length = source_length;
            s.charge_density = charge_density;
            s.omega = omega;
            s.placement = place;
            return ExternalField(s, ideal_infinite);
        }
        case SourceKind::Whisker: {
            WhiskerSource s;
            s.radius = source_radius;
            s.length = source_length;
            s.magnetization = magnetization;
            s.placement = place;
            return ExternalField(s, ideal_infinite);
        }
    }
    throw std::logic_error("unreachable source kind");
}

Trajectory ScenarioConfig::trajectory() const {
    const AxisFrame frame(source_center, source_axis);
    StraightLine line;
    line.point0 = frame.from_local(impact_parameter, 0.0, 0.0);
    line.velocity = frame.e2 * electron_speed;
    return line;
}

ElectronState ScenarioConfig::electron_at(double t) const {
    return state_at(trajectory(), electron_charge, t, constants);
}

CylinderRegion ScenarioConfig::cylinder_region() const {
    if (region_torus) throw ConfigError("region.kind: this operation needs a cylinder region", 0);
    return CylinderRegion(source_center, source_axis, region_radius_over_a * source_radius,
                          region_half_length);
}

TorusRegion ScenarioConfig::torus_region() const {
    if (!region_torus) throw ConfigError("region.kind: this operation needs a torus region", 0);
    return TorusRegion(source_center, source_axis, torus_major, torus_minor);
}

OrientedSurface ScenarioConfig::surface() const {
    return region_torus ? OrientedSurface::from_torus(torus_region())
                        : OrientedSurface::from_cylinder(cylinder_region());
}

} // namespace abfield
