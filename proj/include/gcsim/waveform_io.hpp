#pragma once

// Comma-separated waveform files.
//
// The header row is "time [s]" followed by "name [unit]" per channel. Values
// use the shortest text that reads back to the same double.

#include "gcsim/solver.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace gcsim {

struct WaveformOptions {
    int decimation = 1;  ///< keep samples 0, d, 2d, ...
    std::vector<std::string> channels;  ///< empty: every channel
};

/// Throws ReportingError for an empty series or an unknown channel and
/// UsageError for decimation < 1.
void emit_timeseries(std::ostream& out, const TimeSeries& series,
                     const WaveformOptions& options = {});
void write_timeseries(const std::string& path, const TimeSeries& series,
                      const WaveformOptions& options = {});

/// Throws IoError on malformed text (with the offending line).
[[nodiscard]] TimeSeries read_timeseries(std::istream& in);
[[nodiscard]] TimeSeries read_timeseries_file(const std::string& path);

}  // namespace gcsim
