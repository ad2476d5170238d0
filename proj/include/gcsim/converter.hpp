#pragma once

// Rectifier, dc link, H-bridge and PWM current control for the dc winding.

#include "gcsim/circuit.hpp"
#include "gcsim/reference.hpp"
#include "gcsim/solver.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace gcsim {

struct PiController {
    double kp = 0.0;
    double ki = 0.0;  ///< 1/s
    double integrator = 0.0;
    double out_min = -1.0;
    double out_max = 1.0;
    bool anti_windup = true;
};

/// duty = clamp(kp*error + integrator); then integrator += ki*error*dt_ctrl,
/// skipped when anti-windup is on and the error pushes further into the
/// active limit.
double pi_update(PiController& controller, double error, double dt_ctrl);

/// Triangular carrier: -1 at phase 0, +1 at phase 0.5.
[[nodiscard]] double carrier_value(double phase);

struct BridgeGates {
    bool s1 = false;  ///< leg A high side
    bool s2 = false;  ///< leg A low side
    bool s3 = false;  ///< leg B high side
    bool s4 = false;  ///< leg B low side
    bool operator==(const BridgeGates&) const = default;
};

/// Bipolar PWM: (S1,S4) on while duty exceeds the carrier, else (S2,S3).
[[nodiscard]] BridgeGates pwm_gates(double duty, double carrier_phase);

struct ConverterConfig {
    double ac_rms = 120.0;  ///< V
    double ac_hz = 60.0;
    double link_farads = 4700e-6;
    Switch bridge_switch{};
    Diode rectifier_diode{};
    double carrier_hz = 50e3;
    double sample_hz = 50e3;  ///< controller update rate
    double sensor_gain = 1.0;  ///< A measured per A flowing
    double kp = 0.0;
    double ki = 0.0;
    bool anti_windup = true;
    ReferenceProfile reference;
    /// Open-loop operation at a constant duty when set.
    std::optional<double> fixed_duty;

    void validate() const;
    bool operator==(const ConverterConfig&) const = default;
};

/// Reads the controlled output current from a state.
using CurrentSensor = std::function<double(const HybridNetwork&, const SystemState&)>;

/// PI current loop driving the four bridge gates.
///
/// State slots: 0 integrator, 1 duty, 2 count of controller samples taken.
/// The controller samples at the carrier peaks t = (k + 0.5)/carrier_hz
/// when sample_hz equals carrier_hz, reading the most recent accepted state.
/// The carrier is evaluated at the midpoint of each step.
class PwmCurrentController : public Controller {
public:
    PwmCurrentController(ConverterConfig config, std::array<std::size_t, 4> switches,
                         CurrentSensor sensor);

    [[nodiscard]] std::size_t state_size() const override { return 3; }
    void update(double t_next, const HybridNetwork& network, std::size_t offset,
                const SystemState& previous, SystemState& next) const override;

    static constexpr std::size_t slot_integrator = 0;
    static constexpr std::size_t slot_duty = 1;
    static constexpr std::size_t slot_samples = 2;

private:
    ConverterConfig config_;
    std::array<std::size_t, 4> switches_;
    CurrentSensor sensor_;
};

/// Node and element handles of a converter attached to a network.
struct ConverterPorts {
    std::size_t out_a = 0;  ///< bridge leg A midpoint (positive output)
    std::size_t out_b = 0;  ///< bridge leg B midpoint
    std::size_t link_p = 0;
    std::size_t link_cap = 0;  ///< element index of the dc-link capacitor
    std::array<std::size_t, 4> switches{};  ///< S1..S4 element indices
    std::size_t controller_offset = 0;
};

/// Adds source, diode bridge, dc link, H-bridge and controller to a network.
/// The dc-link negative rail is `ground`. The load goes between out_a and
/// out_b and `sensor` must read the current leaving out_a into the load.
ConverterPorts attach_converter(HybridNetwork& network, const ConverterConfig& config,
                                std::size_t ground, const CurrentSensor& sensor);

/// Stand-alone converter feeding a series R-L load (element "load_l").
[[nodiscard]] HybridNetwork build_converter_network(const ConverterConfig& config,
                                                    double load_ohms, double load_henries,
                                                    ConverterPorts* ports = nullptr);

// ---------------------------------------------------------------------------
// Ziegler-Nichols tuning

struct OscillationAnalysis {
    int cycles = 0;             ///< whole cycles found in the analysed span
    double period = 0.0;        ///< s, mean zero-crossing period
    double decay_ratio = 0.0;   ///< mean ratio of successive cycle amplitudes
    double amplitude = 0.0;     ///< last cycle peak-to-peak
    bool diverged = false;
};

/// Cycle statistics of the second half of a response, about its mean.
[[nodiscard]] OscillationAnalysis analyze_oscillation(std::span<const double> t,
                                                      std::span<const double> y);

/// Closed-loop response of the plant under proportional gain kp (ki = 0).
struct ProportionalResponse {
    std::vector<double> time;
    std::vector<double> output;
    bool diverged = false;
};
using ProportionalPlant = std::function<ProportionalResponse(double kp)>;

struct ZnOptions {
    double growth = 1.5;            ///< geometric factor of the gain search
    double kp_max = 1e6;
    double sustained_band = 0.05;   ///< |decay_ratio - 1| accepted as sustained
    double bracket_tolerance = 0.005;
    /// During bisection a decay ratio of at least 1 - marginal_band counts as
    /// unstable, so amplitude-limited limit cycles are recognised.
    double marginal_band = 0.005;
    int min_cycles = 5;
    /// Peak-to-peak amplitude (output units) below which a response counts
    /// as settled, e.g. PWM quantization jitter.
    double noise_floor = 0.0;
};

struct ZnResult {
    double ku = 0.0;
    double tu = 0.0;  ///< s
    double kp = 0.0;  ///< 0.45 ku
    double ki = 0.0;  ///< 0.54 ku / tu
    int evaluations = 0;
};

/// Classic Ziegler-Nichols PI tuning from the ultimate gain and period.
/// Throws TuningError when no sustained oscillation exists below kp_max or
/// when the loop is already unstable at initial_kp.
[[nodiscard]] ZnResult zn_tune(const ProportionalPlant& plant, double initial_kp,
                               const ZnOptions& options = {});

}  // namespace gcsim
