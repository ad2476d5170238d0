#include "gcsim/converter.hpp"

#include "gcsim/errors.hpp"

#include <algorithm>
#include <cmath>

namespace gcsim {

double pi_update(PiController& c, double error, double dt_ctrl) {
    const double raw = c.kp * error + c.integrator;
    const double duty = std::clamp(raw, c.out_min, c.out_max);
    const bool pushing_high = raw >= c.out_max && error > 0.0;
    const bool pushing_low = raw <= c.out_min && error < 0.0;
    if (!(c.anti_windup && (pushing_high || pushing_low))) {
        c.integrator += c.ki * error * dt_ctrl;
    }
    return duty;
}

double carrier_value(double phase) {
    const double p = phase - std::floor(phase);
    return p < 0.5 ? -1.0 + 4.0 * p : 3.0 - 4.0 * p;
}

BridgeGates pwm_gates(double duty, double carrier_phase) {
    const bool positive = duty >= 1.0 || duty > carrier_value(carrier_phase);
    return positive ? BridgeGates{true, false, false, true} : BridgeGates{false, true, true, false};
}

void ConverterConfig::validate() const {
    auto fail = [](const std::string& why) { throw ConstructionError("converter: " + why); };
    if (!(ac_rms > 0.0) || !(ac_hz > 0.0)) fail("ac input needs rms > 0 and hz > 0");
    if (!(link_farads > 0.0)) fail("dc-link capacitance must be positive");
    if (!(carrier_hz > 0.0)) fail("carrier frequency must be positive");
    if (!(sample_hz > 0.0)) fail("controller sample rate must be positive");
    if (!(sensor_gain > 0.0)) fail("sensor gain must be positive");
    if (!(kp >= 0.0) || !(ki >= 0.0)) fail("controller gains must be >= 0");
    if (fixed_duty && !(std::abs(*fixed_duty) <= 1.0)) fail("fixed duty must lie in [-1, 1]");
    ElectricElement{"switch", 0, 1, bridge_switch}.validate();
    ElectricElement{"diode", 0, 1, rectifier_diode}.validate();
}

PwmCurrentController::PwmCurrentController(ConverterConfig config,
                                           std::array<std::size_t, 4> switches,
                                           CurrentSensor sensor)
    : config_(std::move(config)), switches_(switches), sensor_(std::move(sensor)) {
    config_.validate();
    if (!sensor_) {
        throw ConstructionError("converter: controller needs a current sensor");
    }
}

void PwmCurrentController::update(double t_next, const HybridNetwork& network,
                                  std::size_t offset, const SystemState& previous,
                                  SystemState& next) const {
    double* slots = next.controller.data() + offset;
    const double dt_ctrl = 1.0 / config_.sample_hz;
    if (config_.fixed_duty) {
        slots[slot_duty] = *config_.fixed_duty;
    } else {
        PiController pi{config_.kp, config_.ki, slots[slot_integrator], -1.0, 1.0,
                        config_.anti_windup};
        // Samples due at or before the start of this step use the state at
        // the start of the step.
        const double first = 0.5 / config_.carrier_hz;
        const double eps = 1e-9 * dt_ctrl;
        for (;;) {
            const double t_sample = first + slots[slot_samples] * dt_ctrl;
            if (t_sample > previous.time + eps) {
                break;
            }
            const double measured = config_.sensor_gain * sensor_(network, previous);
            const double error = config_.reference.value(t_sample) - measured;
            slots[slot_duty] = pi_update(pi, error, dt_ctrl);
            slots[slot_samples] += 1.0;
        }
        slots[slot_integrator] = pi.integrator;
    }
    const double t_mid = 0.5 * (previous.time + t_next);
    const BridgeGates g = pwm_gates(slots[slot_duty], t_mid * config_.carrier_hz);
    next.conducting[switches_[0]] = g.s1;
    next.conducting[switches_[1]] = g.s2;
    next.conducting[switches_[2]] = g.s3;
    next.conducting[switches_[3]] = g.s4;
}

ConverterPorts attach_converter(HybridNetwork& net, const ConverterConfig& config,
                                std::size_t ground, const CurrentSensor& sensor) {
    config.validate();
    ConverterPorts ports;
    const auto ac_l = net.add_electric_node("conv_ac_l");
    const auto ac_n = net.add_electric_node("conv_ac_n");
    ports.link_p = net.add_electric_node("conv_link_p");
    ports.out_a = net.add_electric_node("conv_out_a");
    ports.out_b = net.add_electric_node("conv_out_b");
    const auto n = ground;
    const auto p = ports.link_p;

    net.add(ElectricElement{"conv_source", ac_l, ac_n,
                            AcVoltageSource{config.ac_rms, config.ac_hz, 0.0}});
    net.add(ElectricElement{"conv_d1", ac_l, p, config.rectifier_diode});
    net.add(ElectricElement{"conv_d2", ac_n, p, config.rectifier_diode});
    net.add(ElectricElement{"conv_d3", n, ac_l, config.rectifier_diode});
    net.add(ElectricElement{"conv_d4", n, ac_n, config.rectifier_diode});
    ports.link_cap = net.add(ElectricElement{"conv_link", p, n, Capacitor{config.link_farads}});
    ports.switches[0] = net.add(ElectricElement{"conv_s1", p, ports.out_a, config.bridge_switch});
    ports.switches[1] = net.add(ElectricElement{"conv_s2", ports.out_a, n, config.bridge_switch});
    ports.switches[2] = net.add(ElectricElement{"conv_s3", p, ports.out_b, config.bridge_switch});
    ports.switches[3] = net.add(ElectricElement{"conv_s4", ports.out_b, n, config.bridge_switch});
    ports.controller_offset =
        net.add(std::make_shared<PwmCurrentController>(config, ports.switches, sensor));
    return ports;
}

HybridNetwork build_converter_network(const ConverterConfig& config, double load_ohms,
                                      double load_henries, ConverterPorts* ports) {
    HybridNetwork net;
    const auto ground = net.add_electric_node("0");
    net.set_electric_ground(ground);
    // The load elements are added after the converter, so their index is
    // known once the converter is in place.
    auto load_index = std::make_shared<std::size_t>(0);
    CurrentSensor sensor = [load_index](const HybridNetwork&, const SystemState& s) {
        return s.branch_current[*load_index];
    };
    const ConverterPorts p = attach_converter(net, config, ground, sensor);
    const auto mid = net.add_electric_node("load_mid");
    net.add(ElectricElement{"load_r", p.out_a, mid, Resistor{load_ohms}});
    *load_index = net.add(ElectricElement{"load_l", mid, p.out_b, Inductor{load_henries}});
    if (ports) {
        *ports = p;
    }
    return net;
}

// ---------------------------------------------------------------------------
// Ziegler-Nichols

OscillationAnalysis analyze_oscillation(std::span<const double> t, std::span<const double> y) {
    OscillationAnalysis a;
    if (t.size() != y.size() || t.size() < 4) {
        return a;
    }
    double scale = 0.0;
    for (double v : y) {
        if (!std::isfinite(v)) {
            a.diverged = true;
            return a;
        }
        scale = std::max(scale, std::abs(v));
    }
    const double t_mid = 0.5 * (t.front() + t.back());
    const auto start =
        static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), t_mid) - t.begin());
    double sum = 0.0;
    for (std::size_t i = start; i < y.size(); ++i) sum += y[i];
    const double m = sum / static_cast<double>(y.size() - start);

    std::vector<double> crossings;
    std::vector<std::size_t> crossing_index;
    for (std::size_t i = start; i + 1 < y.size(); ++i) {
        const double a0 = y[i] - m;
        const double a1 = y[i + 1] - m;
        if (a0 < 0.0 && a1 >= 0.0) {
            crossings.push_back(t[i] + (t[i + 1] - t[i]) * (-a0) / (a1 - a0));
            crossing_index.push_back(i);
        }
    }
    if (crossings.size() < 3) {
        return a;
    }
    std::vector<double> amplitude;
    for (std::size_t k = 0; k + 1 < crossings.size(); ++k) {
        double lo = INFINITY;
        double hi = -INFINITY;
        for (std::size_t i = crossing_index[k]; i <= crossing_index[k + 1] + 1 && i < y.size(); ++i) {
            lo = std::min(lo, y[i]);
            hi = std::max(hi, y[i]);
        }
        amplitude.push_back(hi - lo);
    }
    // Round-off chatter around a settled value is not an oscillation.
    const double floor = 1e-9 * std::max(scale, 1e-300);
    if (amplitude.back() <= floor && amplitude.front() <= floor) {
        return a;
    }
    a.cycles = static_cast<int>(amplitude.size());
    a.period = (crossings.back() - crossings.front()) / static_cast<double>(a.cycles);
    a.amplitude = amplitude.back();
    a.decay_ratio = amplitude.front() > 0.0
                        ? std::pow(amplitude.back() / amplitude.front(), 1.0 / (a.cycles - 1))
                        : INFINITY;
    return a;
}

namespace {

enum class Regime { decaying, sustained, growing };

Regime classify(const OscillationAnalysis& a, const ZnOptions& o, bool diverged) {
    if (diverged || a.diverged) return Regime::growing;
    if (a.cycles < 2 || a.amplitude < o.noise_floor) return Regime::decaying;
    if (a.decay_ratio > 1.0 + o.sustained_band) return Regime::growing;
    if (a.decay_ratio >= 1.0 - o.sustained_band) return Regime::sustained;
    return Regime::decaying;
}

}  // namespace

ZnResult zn_tune(const ProportionalPlant& plant, double initial_kp, const ZnOptions& o) {
    if (!(initial_kp > 0.0) || !(o.growth > 1.0) || !(o.kp_max > initial_kp) ||
        !(o.noise_floor >= 0.0)) {
        throw UsageError("zn_tune: need 0 < initial_kp < kp_max, growth > 1, noise_floor >= 0");
    }
    ZnResult result;
    auto evaluate = [&](double kp, OscillationAnalysis& out) {
        ++result.evaluations;
        const ProportionalResponse r = plant(kp);
        out = analyze_oscillation(r.time, r.output);
        return classify(out, o, r.diverged);
    };

    OscillationAnalysis a;
    double kp = initial_kp;
    Regime regime = evaluate(kp, a);
    if (regime == Regime::growing) {
        throw TuningError("zn_tune: loop already unstable at the initial gain", 0.0);
    }
    double lo = kp;
    while (regime == Regime::decaying) {
        lo = kp;
        kp *= o.growth;
        if (kp > o.kp_max) {
            throw TuningError("zn_tune: no sustained oscillation below kp_max", lo);
        }
        regime = evaluate(kp, a);
    }
    double hi = kp;
    OscillationAnalysis at_hi = a;
    if (hi == initial_kp) {
        // Sustained already at the starting gain; search downward for a
        // decaying bracket.
        lo = hi;
        do {
            lo /= o.growth;
            regime = evaluate(lo, a);
        } while (regime != Regime::decaying && lo > initial_kp * 1e-6);
    }
    // Bisect on the sign of (decay_ratio - 1).
    while (hi / lo - 1.0 > o.bracket_tolerance) {
        const double mid = std::sqrt(lo * hi);
        OscillationAnalysis m;
        const Regime r = evaluate(mid, m);
        const bool unstable_side =
            r == Regime::growing ||
            (m.cycles >= 2 && m.amplitude >= o.noise_floor &&
             m.decay_ratio >= 1.0 - o.marginal_band);
        if (unstable_side) {
            hi = mid;
            at_hi = m;
        } else {
            lo = mid;
        }
    }
    if (at_hi.cycles < o.min_cycles || !(at_hi.period > 0.0)) {
        throw TuningError("zn_tune: too few oscillation cycles to measure the period", lo);
    }
    result.ku = std::sqrt(lo * hi);
    result.tu = at_hi.period;
    result.kp = 0.45 * result.ku;
    result.ki = 0.54 * result.ku / result.tu;
    return result;
}

}  // namespace gcsim
