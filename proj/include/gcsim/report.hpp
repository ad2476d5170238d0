#pragma once

// Run reports: metrics table, acceptance checks and plot-ready channel sets.

#include "gcsim/scenario.hpp"

#include <map>
#include <string>
#include <vector>

namespace gcsim {

struct Check {
    std::string id;
    std::string description;
    double value = 0.0;
    double limit = 0.0;
    bool pass = false;
};

/// Reference runs some checks compare against.
struct Baselines {
    const Metrics* ideal_zero = nullptr;      ///< ideal source, 0 A
    const Metrics* converter_zero = nullptr;  ///< converter, 0 A
};

/// Acceptance checks for the ideal or converter runs at 0, 5 and 30 A. Other
/// setpoints have none. Checks that need a missing baseline are skipped.
[[nodiscard]] std::vector<Check> acceptance_checks(SourceKind source, double setpoint,
                                                   const Metrics& metrics,
                                                   const CvsrParams& params,
                                                   const Baselines& baselines = {});

/// Worst ratio of V_bias at twice the system frequency to any other harmonic
/// below 1 kHz (dc excluded).
[[nodiscard]] double double_frequency_dominance(const Metrics& metrics, const CvsrParams& params);

struct MetricEntry {
    std::string name;
    double value = 0.0;
    std::string unit;
    std::string channel;  ///< source channel
    std::string window;   ///< key into RunReport::windows
};

[[nodiscard]] std::vector<MetricEntry> metrics_table(const Metrics& metrics);

struct RunReport {
    std::string command;
    std::string config_text;  ///< resolved configuration echo
    std::vector<MetricEntry> metrics;
    std::map<std::string, Window> windows;
    std::vector<Check> checks;
    std::map<std::string, double> results;  ///< command results (gains, factors)
    std::map<std::string, std::string> files;
    double wall_seconds = 0.0;
};

[[nodiscard]] std::string to_json(const RunReport& report);

/// Appends B_left, B_mid, B_right, v_bias and p_dc.
void add_derived_channels(TimeSeries& series, const CvsrParams& params);

struct PlotFigure {
    std::string name;  ///< "fig5", ...
    std::vector<std::string> channels;
};

/// Figure channel sets for the nearest of the 0, 5 and 30 A operating points.
[[nodiscard]] std::vector<PlotFigure> plot_figures(SourceKind source, double setpoint);

}  // namespace gcsim
