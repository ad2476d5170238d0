#pragma once

// Waveform statistics over a time window of a sampled signal.
//
// Integrals use the trapezoidal rule on the recorded samples, with linear
// interpolation at window edges that fall between samples.

#include <span>
#include <vector>

namespace gcsim {

struct Window {
    double t0 = 0.0;
    double t1 = 0.0;
    [[nodiscard]] double length() const { return t1 - t0; }
};

/// The last `cycles` whole periods of `hz` after discarding `startup`
/// seconds. Uses fewer cycles if the record is short; throws ReportingError
/// if fewer than `min_cycles` are available.
[[nodiscard]] Window steady_window(std::span<const double> t, double hz, int cycles = 5,
                                   double startup = 0.05, int min_cycles = 3);

/// The final `length` seconds of the record. Throws ReportingError if the
/// record is shorter.
[[nodiscard]] Window tail_window(std::span<const double> t, double length);

[[nodiscard]] double mean(std::span<const double> t, std::span<const double> v, Window w);
[[nodiscard]] double rms(std::span<const double> t, std::span<const double> v, Window w);
/// Standard deviation about the window mean.
[[nodiscard]] double ac_rms(std::span<const double> t, std::span<const double> v, Window w);

/// Peak amplitude of the component at `hz` by single-bin correlation. At
/// hz == 0 returns the absolute mean.
[[nodiscard]] double dft_magnitude(std::span<const double> t, std::span<const double> v, Window w,
                                   double hz);
/// Phase (rad) of the component at `hz`, as in A*sin(2*pi*hz*t + phase).
[[nodiscard]] double dft_phase(std::span<const double> t, std::span<const double> v, Window w,
                               double hz);

/// sqrt(sum of harmonic 2..max_harmonic squared) / fundamental.
[[nodiscard]] double thd(std::span<const double> t, std::span<const double> v, Window w,
                         double fundamental_hz, int max_harmonic = 25);

struct Extremes {
    double min = 0.0;
    double max = 0.0;
    double min_abs = 0.0;
    double max_abs = 0.0;
};
/// Extremes over the samples inside the window.
[[nodiscard]] Extremes extremes(std::span<const double> t, std::span<const double> v, Window w);

/// Fraction of the window with |v| > threshold (linear crossing times).
[[nodiscard]] double fraction_above(std::span<const double> t, std::span<const double> v,
                                    Window w, double threshold);

/// Centered moving average over `period` seconds.
[[nodiscard]] std::vector<double> moving_average(std::span<const double> t,
                                                 std::span<const double> v, double period);

struct StepResponse {
    double overshoot = 0.0;      ///< peak excursion past the target, fraction of target
    double settling_time = 0.0;  ///< s after t_step until staying inside the band
    bool settled = false;
};

/// Overshoot and settling of `v` toward `target` after `t_step`. The band
/// is +/- band*|target|.
[[nodiscard]] StepResponse step_response(std::span<const double> t, std::span<const double> v,
                                         double target, double t_step, double band = 0.05);

}  // namespace gcsim
