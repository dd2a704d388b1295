#include "abfield/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "abfield/energy.hpp"
#include "abfield/phase.hpp"

namespace abfield {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void write_row(std::ostream& os, std::initializer_list<double> xs) {
    bool first = true;
    for (const double x : xs) {
        if (!first) os << ',';
        os << format_double(x);
        first = false;
    }
    os << '\n';
}

void write_header(std::ostream& os, Command cmd, std::uint64_t digest, const char* columns) {
    os << "# abfield v1 " << command_name(cmd) << " digest=" << digest_hex(digest) << '\n'
       << columns << '\n';
}

void note(RunReport& report, std::ostream& diag, const std::string& text) {
    report.notes.push_back(text);
    diag << "[" << command_name(report.command) << "] " << text << '\n';
}

// Time samples for the flyby; when no sweep is configured, bracket the
// closest approach by five transit times of the impact parameter.
std::vector<double> resolve_times(const ScenarioConfig& cfg) {
    if (cfg.times.set()) return cfg.times.values();
    if (cfg.electron_speed <= 0.0) return {0.0};
    const double t = 5.0 * cfg.impact_parameter / cfg.electron_speed;
    return SweepRange{-t, t, 11}.values();
}

void run_fields(const ScenarioConfig& cfg, RunReport& report, std::ostream& csv,
                std::ostream& diag) {
    const ExternalField src = cfg.make_source();
    const ElectronState st = cfg.electron_at(cfg.fields_time);
    write_header(csv, report.command, report.digest,
                 "x_cm,y_cm,z_cm,b0x_G,b0y_G,b0z_G,bex_G,bey_G,bez_G,"
                 "eex_statV_cm,eey_statV_cm,eez_statV_cm");
    int excluded = 0;
    for (int i = 0; i < cfg.fields_samples; ++i) {
        const double s = static_cast<double>(i) / (cfg.fields_samples - 1);
        const Vec3 p = cfg.fields_from + (cfg.fields_to - cfg.fields_from) * s;
        Vec3 b0{kNan, kNan, kNan}, be{kNan, kNan, kNan}, ee{kNan, kNan, kNan};
        try {
            b0 = b0_field(src, p, cfg.constants, cfg.quadrature);
        } catch (const std::domain_error&) {
            ++excluded; // sample sits on the current sheet
        }
        try {
            ee = electron_e_field(st, p, cfg.constants, cfg.field_model, cfg.electron_cutoff);
            be = electron_b_field(st, p, cfg.constants, cfg.field_model, cfg.electron_cutoff);
        } catch (const std::domain_error&) {
            ++excluded; // sample inside the electron's cutoff ball
        }
        write_row(csv, {p.x, p.y, p.z, b0.x, b0.y, b0.z, be.x, be.y, be.z, ee.x, ee.y, ee.z});
    }
    if (excluded > 0)
        note(report, diag,
             std::to_string(excluded) + " sample(s) inside an excluded ball, reported as nan");
}

void run_energy(const ScenarioConfig& cfg, RunReport& report, std::ostream& csv,
                std::ostream& diag) {
    const ExternalField src = cfg.make_source();
    const CylinderRegion region = cfg.cylinder_region();
    const PhysicalConstants& k = cfg.constants;
    const QuadratureSpec& spec = cfg.quadrature;

    EnergyOptions base_opts;
    base_opts.model = cfg.field_model;
    base_opts.with_cross = false;
    base_opts.with_self = false;
    const EnergyLedger base = energy_ledger(src, nullptr, region, k, spec, base_opts);
    report.converged = report.converged && base.converged;

    const bool finite_solenoid =
        src.kind() == SourceKind::Solenoid && !src.ideal_infinite();
    double inductance = 0.0;
    if (finite_solenoid) inductance = self_inductance(src, k, spec);

    write_header(csv, report.command, report.digest,
                 "t_s,term_external_erg,term_cross_erg,term_self_erg,total_erg,delta_I_statA");
    EnergyOptions opts;
    opts.model = cfg.field_model;
    opts.with_external = false;
    double max_error = base.error_estimate;
    for (const double t : resolve_times(cfg)) {
        const ElectronState st = cfg.electron_at(t);
        const EnergyLedger led = energy_ledger(src, &st, region, k, spec, opts);
        const BackReaction br =
            back_reaction(src, st, k, spec,
                          src.ideal_infinite() ? region.half_length : -1.0, inductance);
        double external = base.term_external;
        if (br.applicable) {
            const double scale = 1.0 + br.delta_I / src.current();
            external = src.ideal_infinite() ? external + br.delta_term_external
                                            : external * scale * scale;
        }
        const double total = external + led.term_cross + led.term_self;
        write_row(csv, {t, external, led.term_cross, led.term_self, total, br.delta_I});
        report.converged = report.converged && led.converged;
        max_error = std::max(max_error, led.error_estimate);
    }
    note(report, diag, "largest ledger error estimate " + format_double(max_error) + " erg");
    if (finite_solenoid)
        note(report, diag, "winding inductance " + format_double(inductance) + " s^2/cm");
}

void run_poynting(const ScenarioConfig& cfg, RunReport& report, std::ostream& csv,
                  std::ostream& diag) {
    const ExternalField src = cfg.make_source();
    const OrientedSurface surface = cfg.surface();
    const PhysicalConstants& k = cfg.constants;
    const std::vector<double> times = resolve_times(cfg);

    write_header(csv, report.command, report.digest,
                 "t_s,rate_full_erg_s,rate_reduced_erg_s,cross_surface_erg_s");
    double max_split = 0.0;
    for (const double t : times) {
        const ElectronState st = cfg.electron_at(t);
        const PoyntingReport pr =
            poynting_rate(src, st, surface, k, cfg.quadrature, cfg.field_model);
        write_row(csv, {t, pr.rate_full, pr.rate_reduced, pr.cross_surface});
        report.converged = report.converged && pr.converged;
        max_split = std::max(max_split, std::fabs(pr.rate_full - pr.rate_reduced));
    }
    note(report, diag,
         "max |rate_full - rate_reduced| = " + format_double(max_split) + " erg/s");
    const double dev =
        flux_independence_check(src, src.with_current_scale(2.0), cfg.trajectory(),
                                cfg.electron_charge, times, surface, k, cfg.quadrature);
    note(report, diag,
         "rate_full deviation under flux doubling (relative): " + format_double(dev));
}

void run_phase(const ScenarioConfig& cfg, RunReport& report, std::ostream& csv,
               std::ostream& diag) {
    const ExternalField src = cfg.make_source();
    const PhysicalConstants& k = cfg.constants;
    const double flux_ref = flux(src, k, cfg.quadrature);
    if (flux_ref == 0.0)
        throw ConfigError("phase: source drive is zero, flux cannot be scaled to targets", 0);

    // Two semicircular arms from (-R, 0, 0) to (R, 0, 0) in the source
    // midplane; together they wind once around the axis.
    const double loop_radius = cfg.loop_radius_over_a * cfg.source_radius;
    const AxisFrame& frame = src.frame();
    BeamPath upper, lower;
    for (int i = 0; i < cfg.points_per_path; ++i) {
        const double s = static_cast<double>(i) / (cfg.points_per_path - 1);
        const double theta_u = M_PI * (1.0 - s);
        const double theta_l = M_PI * (1.0 + s);
        upper.points.push_back(frame.from_local(loop_radius * std::cos(theta_u),
                                                loop_radius * std::sin(theta_u), 0.0));
        lower.points.push_back(frame.from_local(loop_radius * std::cos(theta_l),
                                                loop_radius * std::sin(theta_l), 0.0));
    }

    const std::vector<double> targets =
        cfg.flux_sweep.set() ? cfg.flux_sweep.values() : std::vector<double>{flux_ref};
    write_header(csv, report.command, report.digest, "flux_G_cm2,phase_rad,winding");
    bool unit_winding = true;
    for (const double target : targets) {
        const ExternalField scaled = src.with_current_scale(target / flux_ref);
        const VectorPotential a = [&scaled, &k, &cfg](const Vec3& p) {
            return a0_potential(scaled, p, k, cfg.quadrature);
        };
        const PhaseResult res =
            relative_phase(a, frame, lower, upper, cfg.phase_offset, k, cfg.quadrature);
        write_row(csv, {target, res.phase, res.winding});
        unit_winding = unit_winding && res.unit_winding;
    }
    note(report, diag,
         "phase slope per unit enclosed flux: " + format_double(k.phase_per_flux()) +
             " rad/(G cm^2)");
    if (!unit_winding)
        note(report, diag, "arm pair does not wind once around the axis");
}

void run_scaling(const ScenarioConfig& cfg, RunReport& report, std::ostream& csv,
                 std::ostream& diag) {
    if (cfg.source_kind != SourceKind::Solenoid || cfg.ideal_infinite)
        throw ConfigError("scaling: the aspect sweep needs a finite solenoid source", 0);
    const ExternalField src = cfg.make_source();

    CancellationSettings settings;
    for (const double l : cfg.lengths_over_a)
        settings.lengths.push_back(l * cfg.source_radius);
    settings.times = resolve_times(cfg);
    settings.region_radius_over_a = cfg.region_radius_over_a;
    settings.region_half_length_multiple = cfg.region_half_length_multiple;

    const CancellationReport rep =
        cancellation_sweep(src, cfg.trajectory(), cfg.electron_charge, settings,
                           cfg.constants, cfg.quadrature);
    write_header(csv, report.command, report.digest,
                 "a_over_l,max_cross_erg,max_residual_erg,residual_ratio");
    for (const CancellationSample& s : rep.samples)
        write_row(csv, {s.aspect, s.max_cross, s.max_residual, s.ratio});
    if (!rep.fit.samples.empty()) {
        csv << "# fit p=" << format_double(rep.fit.exponent)
            << " C=" << format_double(rep.fit.prefactor)
            << " r2=" << format_double(rep.fit.r_squared) << '\n';
        note(report, diag,
             "residual ratio scales as aspect^" + format_double(rep.fit.exponent));
    }
}

} // namespace

Command parse_command(const std::string& name) {
    if (name == "fields") return Command::Fields;
    if (name == "energy") return Command::Energy;
    if (name == "poynting") return Command::Poynting;
    if (name == "phase") return Command::Phase;
    if (name == "scaling") return Command::Scaling;
    throw std::invalid_argument("unknown command '" + name +
                                "' (expected fields|energy|poynting|phase|scaling)");
}

std::string command_name(Command cmd) {
    switch (cmd) {
        case Command::Fields: return "fields";
        case Command::Energy: return "energy";
        case Command::Poynting: return "poynting";
        case Command::Phase: return "phase";
        case Command::Scaling: return "scaling";
    }
    return "unknown";
}

RunReport run_command(Command cmd, const ScenarioConfig& cfg, std::ostream& csv,
                      std::ostream& diag) {
    RunReport report;
    report.command = cmd;
    report.digest = config_digest(cfg);
    const auto start = std::chrono::steady_clock::now();
    switch (cmd) {
        case Command::Fields: run_fields(cfg, report, csv, diag); break;
        case Command::Energy: run_energy(cfg, report, csv, diag); break;
        case Command::Poynting: run_poynting(cfg, report, csv, diag); break;
        case Command::Phase: run_phase(cfg, report, csv, diag); break;
        case Command::Scaling: run_scaling(cfg, report, csv, diag); break;
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"classical field laboratory for a charge passing a flux line"};
    app.name("abfield");
    std::string command_arg, config_path, output_path;
    std::vector<std::string> overrides;
    app.add_option("command", command_arg, "fields|energy|poynting|phase|scaling")
        ->required();
    app.add_option("-c,--config", config_path, "scenario file (section.key = value lines)");
    app.add_option("-o,--output", output_path, "CSV destination (default: stdout)");
    app.add_option("-s,--set", overrides, "override, e.g. -s source.length_cm=50");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed); // CLI11 consumes positionals back to front
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        std::string text;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot open scenario file '" + config_path + "'", 0);
            std::ostringstream buf;
            buf << in.rdbuf();
            text = buf.str();
        }
        const ScenarioConfig cfg = parse_config(text, overrides);
        const Command cmd = parse_command(command_arg);

        std::ofstream file;
        std::ostream* csv = &out;
        if (!output_path.empty()) {
            file.open(output_path);
            if (!file) throw ConfigError("cannot open output file '" + output_path + "'", 0);
            csv = &file;
        }
        const RunReport report = run_command(cmd, cfg, *csv, err);
        if (!report.converged) {
            err << "error: quadrature did not reach the requested tolerance\n";
            return 3;
        }
        return 0;
    } catch (const ConfigError& e) {
        err << "config error";
        if (e.line > 0) err << " (line " << e.line << ")";
        err << ": " << e.what() << '\n';
        return 2;
    } catch (const QuadratureError& e) {
        err << "quadrature error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace abfield
