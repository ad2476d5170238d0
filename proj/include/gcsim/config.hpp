#pragma once

// Scenario configuration files.
//
// The format is line based:
//
//   # comment
//   [section]
//   key = value   # trailing comment
//
// Sections are cvsr, material, solver, source, scenario and output. Strings
// may be double-quoted. Unknown sections or keys and repeated keys are
// errors. Every key missing from the document keeps its default.

#include "gcsim/scenario.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gcsim {

struct OutputConfig {
    std::string directory;  ///< empty: GCSIM_OUTPUT_DIR, else "gcsim_out"
    std::vector<std::string> channels;  ///< empty: every channel
    int decimation = 1;
    bool plot_data = false;
    bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
    CvsrParams cvsr{};
    SolverConfig solver{};
    /// Converter hardware and gains; the reference comes from the scenario.
    ConverterConfig converter = default_converter(0.0);
    SourceKind source = SourceKind::ideal;
    double dc_setpoint = 0.0;  ///< A
    /// Replaces the constant setpoint when present.
    std::optional<ReferenceProfile> dc_profile;
    double duration = 0.2;  ///< s
    double startup = 0.05;  ///< s
    int cycles = 5;
    double dc_tail = 0.02;  ///< s
    bool calibrate = false;
    double calibration_target = 21.2;  ///< A RMS
    OutputConfig output{};

    bool operator==(const RunConfig&) const = default;
};

/// Parses a configuration document. Solver step and duration default to
/// 10 us / 0.2 s for the ideal source and 0.5 us / 0.1 s for the converter
/// unless set explicitly. Throws ConfigError with a line and column for
/// syntax errors and with the key path for out-of-range values.
[[nodiscard]] RunConfig parse_config(std::string_view text);

/// Every key with its resolved value, in the format parse_config reads.
[[nodiscard]] std::string to_config_text(const RunConfig& config);

/// Reads and parses a file; throws IoError if it cannot be read.
[[nodiscard]] RunConfig load_config(const std::string& path);

/// The scenario described by a configuration.
[[nodiscard]] Scenario make_scenario(const RunConfig& config);

/// Output directory: the configured one, else $GCSIM_OUTPUT_DIR, else
/// "gcsim_out".
[[nodiscard]] std::string resolve_output_directory(const OutputConfig& output);

}  // namespace gcsim
