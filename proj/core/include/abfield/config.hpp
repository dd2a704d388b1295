#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "abfield/constants.hpp"
#include "abfield/electron.hpp"
#include "abfield/geometry.hpp"
#include "abfield/quadrature.hpp"
#include "abfield/sources.hpp"

namespace abfield {

// Parse or validation failure; line 0 means the error is cross-field or
// comes from an override.
struct ConfigError : std::runtime_error {
    int line;
    ConfigError(const std::string& what, int line_) : std::runtime_error(what), line(line_) {}
};

// start:stop:count sweep; count == 0 means the key was not given.
struct SweepRange {
    double start = 0.0;
    double stop = 0.0;
    int count = 0;

    bool set() const { return count > 0; }
    std::vector<double> values() const;
};

// One scenario, fully resolved: every key has a value (defaults applied),
// every value validated. `entries` holds the canonical key=value form the
// digest and serialization are built from.
struct ScenarioConfig {
    PhysicalConstants constants;
    bool natural_units = false;

    SourceKind source_kind = SourceKind::Solenoid;
    bool ideal_infinite = false;
    double source_radius = 1.0;
    double source_length = 100.0;
    double turns_per_cm = 100.0;
    double current = 1.0;
    double charge_density = 1.0;
    double omega = 1.0;
    double magnetization = 1.0;
    Vec3 source_center{0.0, 0.0, 0.0};
    Vec3 source_axis{0.0, 0.0, 1.0};

    double electron_charge = 0.0;
    double electron_speed = 0.0;
    double impact_parameter = 0.0;
    ElectronFieldModel field_model = ElectronFieldModel::QuasiStatic;
    double electron_cutoff = 1e-9;

    bool region_torus = false;
    double region_radius_over_a = 1.05;
    double region_half_length_multiple = 5.0;
    double region_half_length = 0.0;
    double torus_major = 0.0;
    double torus_minor = 0.0;

    QuadratureSpec quadrature;

    SweepRange times;
    SweepRange flux_sweep;
    std::vector<double> lengths_over_a;
    double loop_radius_over_a = 3.0;
    int points_per_path = 65;
    double phase_offset = 0.0;

    Vec3 fields_from{-3.0, 0.0, 0.0};
    Vec3 fields_to{3.0, 0.0, 0.0};
    int fields_samples = 50;
    double fields_time = 0.0;

    std::map<std::string, std::string> entries;

    ExternalField make_source() const;
    Trajectory trajectory() const; // straight flyby at the impact parameter
    ElectronState electron_at(double t) const;
    CylinderRegion cylinder_region() const; // throws ConfigError for a torus region
    TorusRegion torus_region() const;       // throws ConfigError for a cylinder region
    OrientedSurface surface() const;
};

// Overrides are section.key=value strings applied after the file text.
ScenarioConfig parse_config(const std::string& text,
                            const std::vector<std::string>& overrides = {});

std::string serialize(const ScenarioConfig& cfg);

// FNV-1a over the sorted canonical entries; stable across platforms.
std::uint64_t config_digest(const ScenarioConfig& cfg);
std::string digest_hex(std::uint64_t digest);

// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

} // namespace abfield
