#pragma once

// The CVSR: a three-legged saturable core with an ac winding on the middle
// leg, an air gap in the middle branch and two series-connected dc bias
// coils on the outer legs. The bias is driven by an ideal current source or
// by the PWM converter.

#include "gcsim/analysis.hpp"
#include "gcsim/circuit.hpp"
#include "gcsim/converter.hpp"
#include "gcsim/magnetics.hpp"
#include "gcsim/reference.hpp"
#include "gcsim/solver.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gcsim {

/// Fringing factor calibrated so that the 0 A ideal case carries 21.2 A RMS
/// with the default material and loss values.
inline constexpr double calibrated_fringing = 3.906;

struct CvsrParams {
    CoreGeometry geometry{};
    int n_ac = 20;
    int n_dc = 30;  ///< turns of each outer-leg coil
    double source_rms = 2400.0;  ///< V
    double system_hz = 60.0;
    double load_ohms = 100.0;
    double load_henries = 0.13;
    BHMaterial material{};
    double fringing_factor = calibrated_fringing;
    double r_mag_mid = 25.0;    ///< A-turn per Wb/s, middle leg loss
    double r_mag_outer = 0.1;   ///< A-turn per Wb/s, each outer leg
    int dc_polarity = 1;        ///< -1 reverses both dc coils
    /// Replace the B-H curve by its linear slope and drop the loss elements.
    bool linear_core = false;

    void validate() const;
    bool operator==(const CvsrParams&) const = default;
};

enum class SourceKind { ideal, converter };

/// Fixed names of the elements and nodes created by build_cvsr_network.
namespace cvsr {
inline constexpr const char* winding_ac = "w_ac";
inline constexpr const char* winding_left = "w_dc_left";
inline constexpr const char* winding_right = "w_dc_right";
inline constexpr const char* leg_left = "p_left";
inline constexpr const char* leg_mid = "p_mid";
inline constexpr const char* leg_right = "p_right";
inline constexpr const char* gap = "p_gap";
inline constexpr const char* loss_left = "h_left";
inline constexpr const char* loss_mid = "h_mid";
inline constexpr const char* loss_right = "h_right";
inline constexpr const char* ac_source = "vs_ac";
inline constexpr const char* load_r = "r_load";
inline constexpr const char* load_l = "l_load";
inline constexpr const char* dc_source = "i_dc_source";
inline constexpr const char* dc_plus = "dc_p";
inline constexpr const char* dc_minus = "dc_n";
}  // namespace cvsr

/// Assembles the CVSR. For SourceKind::ideal the dc coils are fed by a
/// current source following `dc_reference`; for SourceKind::converter they
/// are fed by the converter, whose own reference is used.
[[nodiscard]] HybridNetwork build_cvsr_network(const CvsrParams& params, SourceKind source,
                                               const ReferenceProfile& dc_reference = {},
                                               const ConverterConfig& converter = {});

/// PI gains from Ziegler-Nichols tuning of the converter loop on the CVSR at
/// 30 A, where the dc coils are deepest in saturation and the loop gain peaks
/// (Ku 0.842, Tu 44 us).
inline constexpr double tuned_kp = 0.379;
inline constexpr double tuned_ki = 1.0334e4;

struct ZnPlantOptions {
    double setpoint = 30.0;  ///< A, constant reference applied from t = 0
    double duration = 0.03;
    double dt = 0.5e-6;
};

/// Proportional-only converter loop on the CVSR for zn_tune. The response is
/// the dc current as sampled by the controller.
[[nodiscard]] ProportionalPlant cvsr_proportional_plant(const CvsrParams& params,
                                                        const ZnPlantOptions& options = {});

/// Converter defaults with the tuned gains and a constant reference.
[[nodiscard]] ConverterConfig default_converter(double setpoint);

enum class Leg { left, mid, right };
[[nodiscard]] const char* leg_name(Leg leg);

/// Probes recorded by run_scenario: phi_* and dphi_* per leg, i_ac, v_ac_w,
/// i_dc, v_dc (dc terminal voltage), and for converter runs v_link and duty.
[[nodiscard]] std::vector<Probe> cvsr_probes(const HybridNetwork& network, SourceKind source);

/// B(t) = phi(t)/A for one leg.
[[nodiscard]] std::vector<double> probe_flux_density(const TimeSeries& series, Leg leg,
                                                     const CvsrParams& params);
/// N_dc*(dphi_right/dt - dphi_left/dt), signed by the coil polarity.
[[nodiscard]] std::vector<double> probe_v_bias(const TimeSeries& series, const CvsrParams& params);

struct DcPower {
    std::vector<double> power;  ///< W
    double mean = 0.0;          ///< over the whole cycles of the steady window
};
[[nodiscard]] DcPower probe_power_dc(const TimeSeries& series, const CvsrParams& params,
                                     Window window);

struct AnalysisConfig {
    double startup = 0.05;  ///< s discarded before the steady window
    int cycles = 5;
    double dc_tail = 0.02;  ///< s, final span for dc-current statistics
    /// Extra DFT frequencies for V_bias (Hz).
    std::vector<double> v_bias_frequencies;
    /// Step-response target for the dc current; disabled when empty.
    std::optional<double> step_target;
    double step_time = 0.0;
    double step_band = 0.05;
    double smoothing_hz = 50e3;  ///< moving-average period for the step response
};

struct LegMetrics {
    double mean = 0.0;       ///< T
    double amplitude = 0.0;  ///< T, half peak-to-peak
    double max_abs = 0.0;
    double min_abs = 0.0;
    double thd = 0.0;
    double saturation_fraction = 0.0;
};

struct Metrics {
    Window window;
    std::map<std::string, double> channel_rms;
    double i_ac_rms = 0.0;
    double i_ac_phase = 0.0;  ///< rad, relative to the source voltage
    double v_ac_winding_rms = 0.0;
    double v_ac_winding_thd = 0.0;
    LegMetrics left, mid, right;
    double outer_leg_max_difference = 0.0;  ///< max |B_left - B_right|
    double v_bias_rms = 0.0;
    /// V_bias DFT magnitude at harmonics 1..16 of the system frequency.
    std::vector<double> v_bias_harmonics;
    std::map<double, double> v_bias_spectrum;  ///< requested extra frequencies
    double v_bias_low_rms = 0.0;  ///< RMS of harmonics 1..16
    double i_dc_mean_tail = 0.0;
    double i_dc_ripple_tail = 0.0;  ///< ac RMS over the tail
    double p_dc_mean = 0.0;
    double load_power = 0.0;
    std::optional<StepResponse> dc_step;
};

[[nodiscard]] Metrics analyze(const TimeSeries& series, const CvsrParams& params,
                              const AnalysisConfig& config = {});

struct Scenario {
    SourceKind source = SourceKind::ideal;
    ReferenceProfile dc_reference{};  ///< ideal source only
    ConverterConfig converter = default_converter(0.0);
    double duration = 0.2;
    SolverConfig solver{};
    AnalysisConfig analysis{};

    /// Defaults for the given source: 0.2 s at 10 us (ideal) or 0.1 s at
    /// 0.5 us (converter), constant setpoint, step metrics for the converter.
    static Scenario make(SourceKind source, double setpoint);
};

struct ScenarioResult {
    TimeSeries series;
    Metrics metrics;
};

[[nodiscard]] ScenarioResult run_scenario(const CvsrParams& params, const Scenario& scenario);

struct CalibrationOptions {
    double lo = 1.0;
    double hi = 10.0;
    double tolerance = 1e-4;  ///< relative RMS mismatch accepted
    int max_iterations = 60;
    double duration = 0.2;
    double dt = 10e-6;
};

/// Fringing factor at which the 0 A ideal case reaches `target_rms`.
/// Throws CalibrationError carrying the RMS values at both bounds when the
/// target lies outside them.
[[nodiscard]] double calibrate_fringing(const CvsrParams& params, double target_rms,
                                        const CalibrationOptions& options = {});

struct CriticalOptions {
    double step = 0.25;  ///< A
    double max_current = 30.0;
    double duration = 0.2;
    double dt = 10e-6;
    unsigned threads = 0;  ///< 0: hardware concurrency
};

/// Smallest grid current at which either outer leg exceeds b_sat in steady
/// state. Throws ReportingError if none up to max_current.
[[nodiscard]] double find_critical_dc(const CvsrParams& params,
                                      const CriticalOptions& options = {});

}  // namespace gcsim
