#include "gcsim/scenario.hpp"

#include "gcsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <memory>
#include <thread>

namespace gcsim {

void CvsrParams::validate() const {
    auto fail = [](const std::string& why) { throw ConstructionError("cvsr: " + why); };
    try {
        geometry.validate();
        material.validate();
    } catch (const DomainError& e) {
        fail(e.what());
    }
    if (n_ac <= 0 || n_dc <= 0) fail("winding turns must be positive");
    if (!(source_rms >= 0.0)) fail("source voltage must be >= 0");
    if (!(system_hz > 0.0)) fail("system frequency must be positive");
    if (!(load_ohms > 0.0) || !(load_henries > 0.0)) fail("load R and L must be positive");
    if (!(fringing_factor >= 1.0)) fail("fringing factor must be >= 1");
    if (!(r_mag_mid >= 0.0) || !(r_mag_outer >= 0.0)) fail("r_mag must be >= 0");
    if (dc_polarity != 1 && dc_polarity != -1) fail("dc polarity must be +1 or -1");
}

HybridNetwork build_cvsr_network(const CvsrParams& params, SourceKind source,
                                 const ReferenceProfile& dc_reference,
                                 const ConverterConfig& converter) {
    params.validate();
    const CoreGeometry& g = params.geometry;
    HybridNetwork net;

    // Magnetic side. The middle branch runs bottom -> top, the outer legs
    // top -> bottom, so phi_mid = phi_left + phi_right.
    const auto bottom = net.add_magnetic_node("bottom");
    const auto top = net.add_magnetic_node("top");
    net.set_magnetic_ground(bottom);
    const bool lossy = !params.linear_core;
    auto leg = [&](const char* name, std::size_t a, std::size_t b, double length) {
        if (params.linear_core) {
            return PermeanceElement::linear(name, a, b, params.material.mu_r_linear, g.area, length);
        }
        return PermeanceElement::nonlinear(name, a, b, params.material, g.area, length);
    };

    const auto mid_w = net.add_magnetic_node("mid_winding");
    const auto mid_core = net.add_magnetic_node("mid_core");
    const auto mid_gap = lossy ? net.add_magnetic_node("mid_gap") : mid_core;
    net.add(leg(cvsr::leg_mid, mid_w, mid_core, g.l_mid));
    if (lossy) {
        net.add(HysteresisElement{cvsr::loss_mid, mid_core, mid_gap, params.r_mag_mid});
    }
    net.add(PermeanceElement::air_gap(cvsr::gap, mid_gap, top, g.area, g.h_gap,
                                      params.fringing_factor));

    auto outer = [&](const char* perm, const char* loss, const char* prefix) {
        const auto a = net.add_magnetic_node(std::string(prefix) + "_core");
        const auto b = lossy ? net.add_magnetic_node(std::string(prefix) + "_winding") : a;
        net.add(leg(perm, top, a, g.l_out));
        if (lossy) {
            net.add(HysteresisElement{loss, a, b, params.r_mag_outer});
        }
        return b;
    };
    const auto left_w = outer(cvsr::leg_left, cvsr::loss_left, "left");
    const auto right_w = outer(cvsr::leg_right, cvsr::loss_right, "right");

    // Electric side: source, R-L load and the ac winding in series.
    const auto ground = net.add_electric_node("0");
    net.set_electric_ground(ground);
    const auto ac_s = net.add_electric_node("ac_source");
    const auto ac_m = net.add_electric_node("ac_load");
    const auto ac_w = net.add_electric_node("ac_winding");
    net.add(ElectricElement{cvsr::ac_source, ac_s, ground,
                            AcVoltageSource{params.source_rms, params.system_hz, 0.0}});
    net.add(ElectricElement{cvsr::load_r, ac_s, ac_m, Resistor{params.load_ohms}});
    net.add(ElectricElement{cvsr::load_l, ac_m, ac_w, Inductor{params.load_henries}});
    net.add(WindingGyrator{cvsr::winding_ac, params.n_ac, ac_w, ground, mid_w, bottom, 1});

    // dc coils in series: dc+ -> right coil -> left coil -> dc-. Positive
    // current drives flux down the right leg and up the left leg.
    std::size_t dc_p = 0;
    std::size_t dc_n = 0;
    auto right_index = std::make_shared<std::size_t>(0);
    if (source == SourceKind::ideal) {
        dc_p = net.add_electric_node(cvsr::dc_plus);
        dc_n = ground;
        net.add(ElectricElement{cvsr::dc_source, dc_n, dc_p, CurrentSource{dc_reference}});
    } else {
        CurrentSensor sensor = [right_index](const HybridNetwork&, const SystemState& s) {
            return s.gyrator_current[*right_index];
        };
        const ConverterPorts ports = attach_converter(net, converter, ground, sensor);
        dc_p = ports.out_a;
        dc_n = ports.out_b;
    }
    const auto dc_mid = net.add_electric_node("dc_mid");
    *right_index = net.add(WindingGyrator{cvsr::winding_right, params.n_dc, dc_p, dc_mid, bottom,
                                          right_w, params.dc_polarity});
    net.add(WindingGyrator{cvsr::winding_left, params.n_dc, dc_mid, dc_n, bottom, left_w,
                           -params.dc_polarity});
    return net;
}

ConverterConfig default_converter(double setpoint) {
    ConverterConfig c;
    c.kp = tuned_kp;
    c.ki = tuned_ki;
    c.reference = ReferenceProfile::constant(setpoint);
    return c;
}

const char* leg_name(Leg leg) {
    switch (leg) {
        case Leg::left:
            return "left";
        case Leg::mid:
            return "mid";
        case Leg::right:
            return "right";
    }
    return "?";
}

std::vector<Probe> cvsr_probes(const HybridNetwork& net, SourceKind source) {
    std::vector<Probe> p{
        Probe::flux(net, cvsr::leg_left, "phi_left"),
        Probe::flux(net, cvsr::leg_mid, "phi_mid"),
        Probe::flux(net, cvsr::leg_right, "phi_right"),
        Probe::flux_rate(net, cvsr::leg_left, "dphi_left"),
        Probe::flux_rate(net, cvsr::leg_mid, "dphi_mid"),
        Probe::flux_rate(net, cvsr::leg_right, "dphi_right"),
        Probe::element_current(net, cvsr::load_l, "i_ac"),
        Probe::winding_voltage(net, cvsr::winding_ac, "v_ac_w"),
        Probe::winding_current(net, cvsr::winding_right, "i_dc"),
    };
    const auto right = net.find_winding(cvsr::winding_right);
    const auto left = net.find_winding(cvsr::winding_left);
    p.push_back({"v_dc", "V", [right, left](const HybridNetwork& n, const SystemState& s) {
                     auto v = [&](std::size_t w) {
                         const WindingGyrator& g = n.windings()[w];
                         return s.elec_potential[g.elec_p] - s.elec_potential[g.elec_n];
                     };
                     return v(right) + v(left);
                 }});
    if (source == SourceKind::converter) {
        p.push_back(Probe::element_voltage(net, "conv_link", "v_link"));
        const std::size_t offset = net.controllers().front().offset;
        p.push_back(Probe::controller_slot(offset + PwmCurrentController::slot_duty, "duty", "1"));
    }
    return p;
}

std::vector<double> probe_flux_density(const TimeSeries& series, Leg leg,
                                       const CvsrParams& params) {
    std::vector<double> b = series.channel(std::string("phi_") + leg_name(leg)).values;
    for (double& x : b) x /= params.geometry.area;
    return b;
}

std::vector<double> probe_v_bias(const TimeSeries& series, const CvsrParams& params) {
    const auto& l = series.channel("dphi_left").values;
    const auto& r = series.channel("dphi_right").values;
    std::vector<double> v(l.size());
    const double k = params.dc_polarity * static_cast<double>(params.n_dc);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = k * (r[i] - l[i]);
    return v;
}

DcPower probe_power_dc(const TimeSeries& series, const CvsrParams& params, Window window) {
    DcPower out;
    const auto v = probe_v_bias(series, params);
    const auto& i = series.channel("i_dc").values;
    out.power.resize(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out.power[k] = v[k] * i[k];
    out.mean = mean(series.time(), out.power, window);
    return out;
}

namespace {

LegMetrics leg_metrics(std::span<const double> t, std::span<const double> b, Window w,
                       const CvsrParams& params) {
    LegMetrics m;
    const Extremes e = extremes(t, b, w);
    m.mean = mean(t, b, w);
    m.amplitude = 0.5 * (e.max - e.min);
    m.max_abs = e.max_abs;
    m.min_abs = e.min_abs;
    m.thd = thd(t, b, w, params.system_hz);
    m.saturation_fraction = fraction_above(t, b, w, params.material.b_sat);
    return m;
}

}  // namespace

Metrics analyze(const TimeSeries& series, const CvsrParams& params, const AnalysisConfig& cfg) {
    Metrics m;
    const auto& t = series.time();
    const double hz = params.system_hz;
    m.window = steady_window(t, hz, cfg.cycles, cfg.startup);
    const Window w = m.window;
    for (const auto& c : series.channels()) {
        m.channel_rms[c.name] = rms(t, c.values, w);
    }

    const auto bl = probe_flux_density(series, Leg::left, params);
    const auto bm = probe_flux_density(series, Leg::mid, params);
    const auto br = probe_flux_density(series, Leg::right, params);
    m.left = leg_metrics(t, bl, w, params);
    m.mid = leg_metrics(t, bm, w, params);
    m.right = leg_metrics(t, br, w, params);
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] >= w.t0 - 1e-12) {
            m.outer_leg_max_difference = std::max(m.outer_leg_max_difference, std::abs(bl[i] - br[i]));
        }
    }

    const auto& i_ac = series.channel("i_ac").values;
    m.i_ac_rms = rms(t, i_ac, w);
    m.i_ac_phase = dft_phase(t, i_ac, w, hz);
    const auto& v_ac = series.channel("v_ac_w").values;
    m.v_ac_winding_rms = rms(t, v_ac, w);
    m.v_ac_winding_thd = thd(t, v_ac, w, hz);
    m.load_power = params.load_ohms * m.i_ac_rms * m.i_ac_rms;

    const auto vb = probe_v_bias(series, params);
    m.v_bias_rms = rms(t, vb, w);
    double low = 0.0;
    for (int k = 1; k <= 16; ++k) {
        const double a = dft_magnitude(t, vb, w, k * hz);
        m.v_bias_harmonics.push_back(a);
        low += 0.5 * a * a;
    }
    m.v_bias_low_rms = std::sqrt(low);
    for (double f : cfg.v_bias_frequencies) {
        m.v_bias_spectrum[f] = dft_magnitude(t, vb, w, f);
    }

    const auto& i_dc = series.channel("i_dc").values;
    const Window tail = tail_window(t, cfg.dc_tail);
    m.i_dc_mean_tail = mean(t, i_dc, tail);
    m.i_dc_ripple_tail = ac_rms(t, i_dc, tail);
    m.p_dc_mean = probe_power_dc(series, params, w).mean;

    if (cfg.step_target) {
        const auto smooth = moving_average(t, i_dc, 1.0 / cfg.smoothing_hz);
        m.dc_step = step_response(t, smooth, *cfg.step_target, cfg.step_time, cfg.step_band);
    }
    return m;
}

ProportionalPlant cvsr_proportional_plant(const CvsrParams& params, const ZnPlantOptions& o) {
    return [params, o](double kp) {
        ConverterConfig cfg = default_converter(o.setpoint);
        cfg.kp = kp;
        cfg.ki = 0.0;
        const HybridNetwork net = build_cvsr_network(params, SourceKind::converter, {}, cfg);
        SolverConfig sc;
        sc.dt = o.dt;
        const Solver solver(net, sc);
        const Probe sensor = Probe::winding_current(net, cvsr::winding_right, "i_dc");
        // the converter is the only controller, so its slots start at 0
        const std::size_t samples = PwmCurrentController::slot_samples;
        ProportionalResponse r;
        const StepObserver record = [&](const SystemState& prev, const SystemState& next,
                                        const StepReport&) {
            if (next.controller[samples] != prev.controller[samples]) {
                const double i = sensor.read(net, prev);
                r.time.push_back(prev.time);
                r.output.push_back(i);
                if (!std::isfinite(i)) r.diverged = true;
            }
        };
        (void)solver.run(net.zero_state(), o.duration, {}, record);
        return r;
    };
}

Scenario Scenario::make(SourceKind source, double setpoint) {
    Scenario s;
    s.source = source;
    if (source == SourceKind::ideal) {
        s.dc_reference = ReferenceProfile::constant(setpoint);
        s.duration = 0.2;
        s.solver.dt = 10e-6;
    } else {
        s.converter = default_converter(setpoint);
        s.duration = 0.1;
        s.solver.dt = 0.5e-6;
        s.analysis.v_bias_frequencies = {s.converter.carrier_hz};
        if (setpoint != 0.0) {
            s.analysis.step_target = setpoint;
        }
        s.analysis.smoothing_hz = s.converter.carrier_hz;
    }
    return s;
}

ScenarioResult run_scenario(const CvsrParams& params, const Scenario& scenario) {
    const HybridNetwork net =
        build_cvsr_network(params, scenario.source, scenario.dc_reference, scenario.converter);
    const Solver solver(net, scenario.solver);
    ScenarioResult r;
    r.series = solver.run(net.zero_state(), scenario.duration, cvsr_probes(net, scenario.source));
    r.metrics = analyze(r.series, params, scenario.analysis);
    return r;
}

namespace {

double ideal_ac_rms(CvsrParams params, double fringing, const CalibrationOptions& o) {
    params.fringing_factor = fringing;
    Scenario s = Scenario::make(SourceKind::ideal, 0.0);
    s.duration = o.duration;
    s.solver.dt = o.dt;
    const HybridNetwork net = build_cvsr_network(params, SourceKind::ideal, s.dc_reference);
    const Solver solver(net, s.solver);
    const TimeSeries ts = solver.run(net.zero_state(), s.duration,
                                     {Probe::element_current(net, cvsr::load_l, "i_ac")});
    const Window w = steady_window(ts.time(), params.system_hz, s.analysis.cycles, s.analysis.startup);
    return rms(ts.time(), ts.channel("i_ac").values, w);
}

}  // namespace

double calibrate_fringing(const CvsrParams& params, double target_rms,
                          const CalibrationOptions& o) {
    if (!(o.lo >= 1.0) || !(o.hi > o.lo) || !(target_rms > 0.0)) {
        throw UsageError("calibrate_fringing: need 1 <= lo < hi and a positive target");
    }
    // RMS falls as the fringing factor (and with it the reactance) grows.
    double a = o.lo;
    double b = o.hi;
    double fa = ideal_ac_rms(params, a, o) - target_rms;
    double fb = ideal_ac_rms(params, b, o) - target_rms;
    if (fa < 0.0 || fb > 0.0) {
        throw CalibrationError("calibrate_fringing: target " + std::to_string(target_rms) +
                                   " A outside the range reachable with fringing in [" +
                                   std::to_string(o.lo) + ", " + std::to_string(o.hi) + "]",
                               fa + target_rms, fb + target_rms);
    }
    if (std::abs(fa) <= o.tolerance * target_rms) return a;
    if (std::abs(fb) <= o.tolerance * target_rms) return b;
    int side = 0;
    for (int it = 0; it < o.max_iterations; ++it) {
        // Illinois variant of regula falsi
        const double c = (a * fb - b * fa) / (fb - fa);
        const double fc = ideal_ac_rms(params, c, o) - target_rms;
        if (std::abs(fc) <= o.tolerance * target_rms) {
            return c;
        }
        if ((fc > 0.0) == (fa > 0.0)) {
            a = c;
            fa = fc;
            if (side == -1) fb *= 0.5;
            side = -1;
        } else {
            b = c;
            fb = fc;
            if (side == 1) fa *= 0.5;
            side = 1;
        }
    }
    throw CalibrationError("calibrate_fringing: no convergence", fa + target_rms, fb + target_rms);
}

double find_critical_dc(const CvsrParams& params, const CriticalOptions& o) {
    if (!(o.step > 0.0) || !(o.max_current >= o.step)) {
        throw UsageError("find_critical_dc: need 0 < step <= max_current");
    }
    auto saturates = [&](int k) {
        Scenario s = Scenario::make(SourceKind::ideal, k * o.step);
        s.duration = o.duration;
        s.solver.dt = o.dt;
        const HybridNetwork net = build_cvsr_network(params, SourceKind::ideal, s.dc_reference);
        const Solver solver(net, s.solver);
        const TimeSeries ts = solver.run(net.zero_state(), s.duration,
                                         {Probe::flux(net, cvsr::leg_left, "phi_left"),
                                          Probe::flux(net, cvsr::leg_right, "phi_right")});
        const Window w = steady_window(ts.time(), params.system_hz, s.analysis.cycles,
                                       s.analysis.startup);
        const double bl = extremes(ts.time(), probe_flux_density(ts, Leg::left, params), w).max_abs;
        const double br = extremes(ts.time(), probe_flux_density(ts, Leg::right, params), w).max_abs;
        return std::max(bl, br) > params.material.b_sat;
    };
    const int top = static_cast<int>(std::floor(o.max_current / o.step + 1e-9));
    if (!saturates(top)) {
        throw ReportingError("find_critical_dc: outer legs never exceed b_sat up to " +
                             std::to_string(top * o.step) + " A");
    }
    if (saturates(0)) {
        return 0.0;
    }
    unsigned threads = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
    // Invariant: saturates(lo) is false, saturates(hi) is true.
    int lo = 0;
    int hi = top;
    while (hi - lo > 1) {
        const int gaps = std::min<int>(static_cast<int>(threads) + 1, hi - lo);
        std::vector<int> points;
        for (int j = 1; j < gaps; ++j) {
            points.push_back(lo + static_cast<int>(std::llround(double(hi - lo) * j / gaps)));
        }
        std::vector<std::future<bool>> results;
        for (int k : points) {
            results.push_back(std::async(points.size() > 1 ? std::launch::async : std::launch::deferred,
                                         saturates, k));
        }
        int new_lo = lo;
        int new_hi = hi;
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (results[j].get()) {
                new_hi = std::min(new_hi, points[j]);
            } else {
                new_lo = std::max(new_lo, points[j]);
            }
        }
        lo = new_lo;
        hi = new_hi;
    }
    return hi * o.step;
}

}  // namespace gcsim
