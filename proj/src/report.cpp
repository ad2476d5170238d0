#include "gcsim/report.hpp"

#include "gcsim/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace gcsim {

namespace {

void add(std::vector<Check>& out, std::string id, std::string what, double value, double limit,
         bool pass) {
    out.push_back({std::move(id), std::move(what), value, limit, pass});
}

double full_load_ac_rms(const CvsrParams& p) {
    const double w = 2.0 * std::numbers::pi * p.system_hz;
    return p.source_rms / std::abs(std::complex<double>(p.load_ohms, w * p.load_henries));
}

void saturation_checks(std::vector<Check>& out, const std::string& id, const Metrics& m,
                       const CvsrParams& p, const Baselines& base) {
    const double bmin = std::min(m.left.min_abs, m.right.min_abs);
    add(out, id + ".outer_saturated", "min |B| over the cycle in both outer legs > b_sat (T)", bmin,
        p.material.b_sat, bmin > p.material.b_sat);
    if (base.ideal_zero) {
        const double limit = 0.1 * base.ideal_zero->mid.amplitude;
        add(out, id + ".mid_amplitude", "center-leg B amplitude < 10% of the 0 A value (T)",
            m.mid.amplitude, limit, m.mid.amplitude < limit);
    }
}

}  // namespace

double double_frequency_dominance(const Metrics& m, const CvsrParams& p) {
    const auto& h = m.v_bias_harmonics;
    if (h.size() < 2) throw ReportingError("double_frequency_dominance: no V_bias harmonics");
    double other = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double hz = (k + 1) * p.system_hz;
        if (k != 1 && hz < 1000.0) other = std::max(other, h[k]);
    }
    return other > 0.0 ? h[1] / other : INFINITY;
}

std::vector<Check> acceptance_checks(SourceKind source, double setpoint, const Metrics& m,
                                     const CvsrParams& p, const Baselines& base) {
    std::vector<Check> out;
    const double b_sat = p.material.b_sat;
    const double vbias_threshold =
        base.ideal_zero ? 0.005 * base.ideal_zero->v_ac_winding_rms : NAN;

    if (source == SourceKind::ideal && setpoint == 0.0) {
        add(out, "A1.i_ac", "ac current RMS within 2% of 21.2 A (A)", m.i_ac_rms, 21.2,
            std::abs(m.i_ac_rms - 21.2) <= 0.02 * 21.2);
        add(out, "A1.outer_identical", "outer-leg B waveforms identical (T)",
            m.outer_leg_max_difference, 1e-3, m.outer_leg_max_difference < 1e-3);
        const double thd = std::max(m.left.thd, m.right.thd);
        add(out, "A1.outer_sinusoidal", "outer-leg B THD < 1%", thd, 0.01, thd < 0.01);
        const double limit = 0.005 * m.v_ac_winding_rms;
        add(out, "A1.v_bias", "V_bias RMS < 0.5% of ac-winding voltage RMS (V)", m.v_bias_rms,
            limit, m.v_bias_rms < limit);
    } else if (source == SourceKind::ideal && setpoint == 5.0) {
        const double product = m.left.mean * m.right.mean;
        add(out, "A2.opposite_offsets", "outer-leg dc offsets of opposite sign (T^2)", product, 0.0,
            product < 0.0);
        const double peak = std::min(m.left.max_abs, m.right.max_abs);
        add(out, "A2.peaks", "each outer leg peaks above b_sat (T)", peak, b_sat, peak > b_sat);
        const double ratio = double_frequency_dominance(m, p);
        add(out, "A2.double_frequency", "V_bias bin at 2f >= 10x other bins below 1 kHz", ratio,
            10.0, ratio >= 10.0);
        if (base.ideal_zero) {
            add(out, "A2.thd", "ac-winding voltage THD above the 0 A value", m.v_ac_winding_thd,
                base.ideal_zero->v_ac_winding_thd,
                m.v_ac_winding_thd > base.ideal_zero->v_ac_winding_thd);
            const double ref = base.ideal_zero->i_ac_rms;
            add(out, "A2.i_ac", "ac current RMS within 3% of the 0 A value (A)", m.i_ac_rms, ref,
                std::abs(m.i_ac_rms - ref) <= 0.03 * ref);
        }
    } else if (source == SourceKind::ideal && setpoint == 30.0) {
        saturation_checks(out, "A3", m, p, base);
        const double target = full_load_ac_rms(p);
        add(out, "A3.i_ac", "ac current RMS within 1% of the full-load value (A)", m.i_ac_rms,
            target, std::abs(m.i_ac_rms - target) <= 0.01 * target);
        if (base.ideal_zero) {
            add(out, "A3.v_bias", "V_bias RMS below the 0 A threshold (V)", m.v_bias_rms,
                vbias_threshold, m.v_bias_rms < vbias_threshold);
        }
    } else if (source == SourceKind::converter && setpoint == 0.0) {
        add(out, "A4.i_dc_mean", "dc current mean within 50 mA of zero (A)", m.i_dc_mean_tail, 0.05,
            std::abs(m.i_dc_mean_tail) <= 0.05);
        add(out, "A4.ripple", "visible dc current ripple (A RMS)", m.i_dc_ripple_tail, 1e-3,
            m.i_dc_ripple_tail > 1e-3);
        double carrier = 0.0;
        for (const auto& [hz, a] : m.v_bias_spectrum) carrier = std::max(carrier, a);
        const double low = *std::max_element(m.v_bias_harmonics.begin(), m.v_bias_harmonics.end());
        add(out, "A4.v_bias_50k", "V_bias carrier-frequency bin above every low harmonic (V)",
            carrier, low, carrier > low);
        add(out, "A4.thd", "ac-winding voltage THD < 1%", m.v_ac_winding_thd, 0.01,
            m.v_ac_winding_thd < 0.01);
        const double limit = 1e-3 * m.load_power;
        add(out, "A4.p_dc", "dc-winding mean power nonzero and < 0.1% of load power (W)",
            m.p_dc_mean, limit, m.p_dc_mean != 0.0 && std::abs(m.p_dc_mean) < limit);
    } else if (source == SourceKind::converter && setpoint == 5.0) {
        add(out, "A5.i_dc_mean", "dc current mean within 2% of 5 A (A)", m.i_dc_mean_tail, 5.0,
            std::abs(m.i_dc_mean_tail - 5.0) <= 0.1);
        const double overshoot = m.dc_step ? m.dc_step->overshoot : NAN;
        const double settle = m.dc_step && m.dc_step->settled ? m.dc_step->settling_time : INFINITY;
        add(out, "A5.overshoot", "step overshoot <= 25%", overshoot, 0.25, overshoot <= 0.25);
        add(out, "A5.settling", "settling time <= 20 ms (s)", settle, 0.02, settle <= 0.02);
        const double ratio = double_frequency_dominance(m, p);
        add(out, "A5.double_frequency", "V_bias low-frequency content dominated by 2f", ratio, 1.0,
            ratio > 1.0);
        double carrier = 0.0;
        for (const auto& [hz, a] : m.v_bias_spectrum) carrier = std::max(carrier, a);
        add(out, "A5.ripple", "50 kHz ripple present in V_bias (V)", carrier, 1.0, carrier > 1.0);
        add(out, "A5.p_dc", "cycle-averaged dc-winding power > 0 (W)", m.p_dc_mean, 0.0,
            m.p_dc_mean > 0.0);
    } else if (source == SourceKind::converter && setpoint == 30.0) {
        saturation_checks(out, "A6", m, p, base);
        if (base.ideal_zero && base.converter_zero) {
            const double limit = vbias_threshold + base.converter_zero->v_bias_rms;
            add(out, "A6.v_bias", "V_bias RMS below the 0 A threshold plus the 0 A ripple floor (V)",
                m.v_bias_rms, limit, m.v_bias_rms < limit);
        }
    }
    return out;
}

std::vector<MetricEntry> metrics_table(const Metrics& m) {
    std::vector<MetricEntry> t;
    auto row = [&](std::string name, double v, std::string unit, std::string ch,
                   std::string window = "steady") {
        t.push_back({std::move(name), v, std::move(unit), std::move(ch), std::move(window)});
    };
    row("i_ac_rms", m.i_ac_rms, "A", "i_ac");
    row("i_ac_phase", m.i_ac_phase, "rad", "i_ac");
    row("v_ac_winding_rms", m.v_ac_winding_rms, "V", "v_ac_w");
    row("v_ac_winding_thd", m.v_ac_winding_thd, "1", "v_ac_w");
    for (const auto& [leg, lm] : {std::pair{"left", &m.left}, std::pair{"mid", &m.mid},
                                  std::pair{"right", &m.right}}) {
        const std::string ch = std::string("B_") + leg;
        row(ch + "_mean", lm->mean, "T", ch);
        row(ch + "_amplitude", lm->amplitude, "T", ch);
        row(ch + "_max_abs", lm->max_abs, "T", ch);
        row(ch + "_min_abs", lm->min_abs, "T", ch);
        row(ch + "_thd", lm->thd, "1", ch);
        row(ch + "_saturation_fraction", lm->saturation_fraction, "1", ch);
    }
    row("outer_leg_max_difference", m.outer_leg_max_difference, "T", "B_left,B_right");
    row("v_bias_rms", m.v_bias_rms, "V", "v_bias");
    row("v_bias_low_rms", m.v_bias_low_rms, "V", "v_bias");
    for (std::size_t k = 0; k < m.v_bias_harmonics.size(); ++k) {
        row("v_bias_h" + std::to_string(k + 1), m.v_bias_harmonics[k], "V", "v_bias");
    }
    for (const auto& [hz, a] : m.v_bias_spectrum) {
        row("v_bias_" + std::to_string(static_cast<long long>(std::llround(hz))) + "hz", a, "V",
            "v_bias");
    }
    row("i_dc_mean", m.i_dc_mean_tail, "A", "i_dc", "dc_tail");
    row("i_dc_ripple_rms", m.i_dc_ripple_tail, "A", "i_dc", "dc_tail");
    row("p_dc_mean", m.p_dc_mean, "W", "p_dc");
    row("load_power", m.load_power, "W", "i_ac");
    if (m.dc_step) {
        row("dc_step_overshoot", m.dc_step->overshoot, "1", "i_dc", "run");
        row("dc_step_settling_time", m.dc_step->settled ? m.dc_step->settling_time : INFINITY, "s",
            "i_dc", "run");
    }
    return t;
}

std::string to_json(const RunReport& r) {
    using nlohmann::ordered_json;
    auto num = [](double v) -> ordered_json {
        if (std::isfinite(v)) return v;
        return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    };
    ordered_json j;
    j["command"] = r.command;
    ordered_json windows = ordered_json::object();
    for (const auto& [name, w] : r.windows) windows[name] = {{"t0", w.t0}, {"t1", w.t1}};
    j["windows"] = windows;
    ordered_json metrics = ordered_json::array();
    for (const auto& e : r.metrics) {
        metrics.push_back({{"name", e.name}, {"value", num(e.value)}, {"unit", e.unit},
                           {"channel", e.channel}, {"window", e.window}});
    }
    j["metrics"] = metrics;
    ordered_json results = ordered_json::object();
    for (const auto& [k, v] : r.results) results[k] = num(v);
    j["results"] = results;
    ordered_json checks = ordered_json::array();
    int passed = 0;
    for (const auto& c : r.checks) {
        checks.push_back({{"id", c.id}, {"description", c.description}, {"value", num(c.value)},
                          {"limit", num(c.limit)}, {"pass", c.pass}});
        passed += c.pass ? 1 : 0;
    }
    j["acceptance"] = {{"passed", passed},
                       {"failed", static_cast<int>(r.checks.size()) - passed},
                       {"checks", checks}};
    j["files"] = r.files;
    j["wall_seconds"] = r.wall_seconds;
    j["config"] = r.config_text;
    return j.dump(2) + "\n";
}

void add_derived_channels(TimeSeries& series, const CvsrParams& params) {
    series.add_channel("B_left", "T", probe_flux_density(series, Leg::left, params));
    series.add_channel("B_mid", "T", probe_flux_density(series, Leg::mid, params));
    series.add_channel("B_right", "T", probe_flux_density(series, Leg::right, params));
    series.add_channel("v_bias", "V", probe_v_bias(series, params));
    const auto& t = series.time();
    const Window all{t.front(), t.back()};
    series.add_channel("p_dc", "W", probe_power_dc(series, params, all).power);
}

std::vector<PlotFigure> plot_figures(SourceKind source, double setpoint) {
    const std::vector<std::string> b{"B_left", "B_mid", "B_right"};
    const std::vector<std::string> ac{"v_ac_w"};
    const std::vector<std::string> vb{"v_bias"};
    const double a = std::abs(setpoint);
    const int regime = a < 2.5 ? 0 : (a < 17.5 ? 1 : 2);
    if (source == SourceKind::ideal) {
        switch (regime) {
            case 0:
                return {{"fig5", b}, {"fig6", ac}};
            case 1:
                return {{"fig7", b}, {"fig8", vb}, {"fig9", ac}};
            default:
                return {{"fig10", b}, {"fig11", ac}};
        }
    }
    switch (regime) {
        case 0:
            return {{"fig12", b}, {"fig13", vb}, {"fig14", vb}};
        case 1:
            return {{"fig15", b}, {"fig16", ac}, {"fig17", vb}, {"fig18", {"p_dc"}},
                    {"fig19", {"i_dc", "duty"}}};
        default:
            return {{"fig20", b}, {"fig21", ac}, {"fig22", vb}};
    }
}

}  // namespace gcsim
