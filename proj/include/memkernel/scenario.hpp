// scenario.hpp — Batch scenarios: config in, trace.csv / report.json / superops dumps out
//
// Exit codes: 0 every verdict passed, 2 a verdict failed, 1 input or numerical error.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "memkernel/io.hpp"
#include "memkernel/volterra.hpp"

namespace memkernel {

enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_verdict_failed = 2 };

const std::vector<std::string>& scenario_kinds();

// Command-line values that take precedence over the config file.
struct ScenarioOverrides {
    std::optional<double> step;
    std::optional<double> horizon;
    std::optional<double> tolerance;
};

// Parses a JSON document; throws ConfigError on syntax errors.
Json load_config(const std::filesystem::path& path);

// Runs one scenario and writes its artifacts into outdir. Errors are reported
// on `log` and mapped to exit_error; nothing is left half-written.
int run_scenario(const std::string& kind, const Json& config, const std::filesystem::path& outdir,
                 const ScenarioOverrides& overrides, std::ostream& log);

// t,cp_defect,unitality_defect,choi_herm_residual with 17 significant digits.
std::string trace_csv(const EvolutionTrace& trace);

// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

void emit_csv(const EvolutionTrace& trace, const std::filesystem::path& path);

} // namespace memkernel
