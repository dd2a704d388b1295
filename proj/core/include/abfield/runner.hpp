#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "abfield/config.hpp"

namespace abfield {

enum class Command { Fields, Energy, Poynting, Phase, Scaling };

// Throws std::invalid_argument for an unknown name.
Command parse_command(const std::string& name);
std::string command_name(Command cmd);

struct RunReport {
    Command command = Command::Fields;
    std::uint64_t digest = 0;
    bool converged = true;
    double wall_seconds = 0.0;
    std::vector<std::string> notes;
};

// Runs one command against a resolved scenario. Writes a single CSV table
// to `csv`: line 1 is `# abfield v1 <command> digest=<hex>`, line 2 the
// column names, then one row per sample; scaling appends a `# fit ...`
// footer. Human-readable diagnostics go to `diag` and into `notes`.
RunReport run_command(Command cmd, const ScenarioConfig& cfg, std::ostream& csv,
                      std::ostream& diag);

// Full CLI (args excludes argv[0]): parse flags, read the scenario file,
// apply -s overrides, dispatch. Returns 0 on success, 2 for configuration
// or usage errors, 3 when quadrature failed to reach tolerance.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace abfield
