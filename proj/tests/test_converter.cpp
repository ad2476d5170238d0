#include <catch_amalgamated.hpp>

#include "gcsim/analysis.hpp"
#include "gcsim/converter.hpp"
#include "gcsim/errors.hpp"
#include "synthetic_plants.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace gcsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct ConverterRun {
    TimeSeries series;
    ConverterPorts ports;
};

ConverterRun run_converter(const ConverterConfig& cfg, double r, double l, double duration,
                           double dt = 0.5e-6) {
    ConverterRun out;
    const auto net = build_converter_network(cfg, r, l, &out.ports);
    SolverConfig sc;
    sc.dt = dt;
    const Solver solver(net, sc);
    const std::vector<Probe> probes{
        Probe::element_current(net, "load_l", "i_load"),
        Probe::element_voltage(net, "conv_link", "v_link"),
        Probe::controller_slot(out.ports.controller_offset + PwmCurrentController::slot_duty,
                               "duty", "1"),
    };
    out.series = solver.run(net.zero_state(), duration, probes);
    return out;
}

}  // namespace

TEST_CASE("PI update worked examples", "[converter]") {
    PiController c{.kp = 1.0, .ki = 100.0};
    CHECK_THAT(pi_update(c, 0.5, 1e-3), WithinAbs(0.5, 1e-15));
    CHECK_THAT(c.integrator, WithinAbs(0.05, 1e-15));
    CHECK_THAT(pi_update(c, 0.5, 1e-3), WithinAbs(0.55, 1e-15));

    // saturated and pushing further: integrator frozen
    PiController s{.kp = 10.0, .ki = 100.0, .integrator = 0.2};
    CHECK(pi_update(s, 1.0, 1e-3) == 1.0);
    CHECK(s.integrator == 0.2);
    // saturated but error pulling back: integrator moves
    PiController back{.kp = 10.0, .ki = 100.0, .integrator = 2.0};
    CHECK(pi_update(back, -0.05, 1e-3) == 1.0);
    CHECK_THAT(back.integrator, WithinAbs(1.995, 1e-15));

    PiController wind{.kp = 10.0, .ki = 100.0, .anti_windup = false};
    pi_update(wind, 1.0, 1e-3);
    CHECK_THAT(wind.integrator, WithinAbs(0.1, 1e-15));
}

TEST_CASE("triangular carrier", "[converter]") {
    CHECK(carrier_value(0.0) == -1.0);
    CHECK(carrier_value(0.25) == 0.0);
    CHECK(carrier_value(0.5) == 1.0);
    CHECK(carrier_value(0.75) == 0.0);
    CHECK(carrier_value(3.25) == 0.0);
}

TEST_CASE("PWM on-time fraction is (1 + duty)/2", "[converter][property]") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int n = 20000;
    for (int trial = 0; trial < 30; ++trial) {
        const double duty = dist(rng);
        int on = 0;
        for (int k = 0; k < n; ++k) {
            const auto g = pwm_gates(duty, (k + 0.5) / n);
            REQUIRE_FALSE((g.s1 && g.s2));
            REQUIRE_FALSE((g.s3 && g.s4));
            REQUIRE(g.s1 == g.s4);
            REQUIRE(g.s2 == g.s3);
            on += g.s1 ? 1 : 0;
        }
        REQUIRE_THAT(static_cast<double>(on) / n, WithinAbs(0.5 * (1.0 + duty), 2.0 / n));
    }
    int on = 0;
    for (int k = 0; k < n; ++k) on += pwm_gates(0.5, (k + 0.5) / n).s1 ? 1 : 0;
    CHECK_THAT(static_cast<double>(on) / n, WithinAbs(0.75, 1e-4));
    CHECK(pwm_gates(1.0, 0.5).s1);
    CHECK(pwm_gates(-1.0, 0.0).s2);
}

TEST_CASE("converter configuration is validated", "[converter]") {
    ConverterConfig c;
    c.link_farads = 0.0;
    CHECK_THROWS_AS(c.validate(), ConstructionError);
    c = {};
    c.fixed_duty = 1.5;
    CHECK_THROWS_AS(c.validate(), ConstructionError);
    c = {};
    c.kp = -1.0;
    CHECK_THROWS_AS(c.validate(), ConstructionError);
    CHECK_THROWS_AS(PwmCurrentController(ConverterConfig{}, {0, 1, 2, 3}, CurrentSensor{}),
                    ConstructionError);
}

TEST_CASE("lightly loaded link charges to the rectified peak", "[converter]") {
    ConverterConfig cfg;
    cfg.fixed_duty = 0.0;
    const auto run = run_converter(cfg, 1e5, 1.0, 0.05, 2e-6);
    const double expected = std::sqrt(2.0) * 120.0 - 2.0 * 0.7;
    CHECK_THAT(run.series.channel("v_link").values.back(), WithinRel(expected, 2e-3));
}

TEST_CASE("fixed duty sets the average bridge output", "[converter]") {
    const double r = 100.0;
    const double l = 0.05;
    ConverterConfig cfg;
    cfg.link_farads = 0.02;

    cfg.fixed_duty = 1.0;
    auto run = run_converter(cfg, r, l, 0.06);
    const auto& t = run.series.time();
    const Window w = tail_window(t, 1.0 / 60.0);
    const double v_link = mean(t, run.series.channel("v_link").values, w);
    CHECK_THAT(mean(t, run.series.channel("i_load").values, w), WithinRel(v_link / r, 5e-3));

    cfg.fixed_duty = 0.0;
    run = run_converter(cfg, r, l, 0.06);
    const auto& t0 = run.series.time();
    const auto& i0 = run.series.channel("i_load").values;
    const Window w0 = tail_window(t0, 1.0 / 60.0);
    CHECK_THAT(mean(t0, i0, w0), WithinAbs(0.0, 5e-3));
    // bipolar switching at zero duty still leaves a carrier-frequency ripple
    CHECK(ac_rms(t0, i0, w0) > 1e-3);
}

TEST_CASE("closed loop tracks a ramp reference", "[converter]") {
    ConverterConfig cfg;
    cfg.kp = 2.0;
    cfg.ki = 400.0;
    cfg.reference = ReferenceProfile::ramp(0.0, 5.0, 0.0, 0.02);
    const auto run = run_converter(cfg, 1.0, 0.05, 0.05);
    const auto& t = run.series.time();
    const auto& i = run.series.channel("i_load").values;
    const auto avg = moving_average(t, i, 1.0 / 50e3);
    for (std::size_t k = 0; k < t.size(); k += 997) {
        if (t[k] > 0.005) REQUIRE_THAT(avg[k], WithinAbs(cfg.reference.value(t[k]), 0.15));
    }
    CHECK_THAT(mean(t, i, tail_window(t, 0.01)), WithinRel(5.0, 0.01));
    for (double d : run.series.channel("duty").values) {
        REQUIRE(std::abs(d) <= 1.0);
    }
}

TEST_CASE("sensor gain scales the regulated current", "[converter]") {
    ConverterConfig cfg;
    cfg.kp = 2.0;
    cfg.ki = 400.0;
    cfg.sensor_gain = 2.0;
    cfg.reference = ReferenceProfile::constant(4.0);
    const auto run = run_converter(cfg, 1.0, 0.05, 0.05);
    const auto& t = run.series.time();
    CHECK_THAT(mean(t, run.series.channel("i_load").values, tail_window(t, 0.01)),
               WithinRel(2.0, 0.01));
}

TEST_CASE("oscillation analysis of a pure sinusoid", "[converter][zn]") {
    std::vector<double> t;
    std::vector<double> y;
    for (int k = 0; k <= 20000; ++k) {
        t.push_back(k * 1e-4);
        y.push_back(3.0 + std::sin(2.0 * std::numbers::pi * 7.0 * t.back()));
    }
    const auto a = analyze_oscillation(t, y);
    // only the second half is analysed
    CHECK(a.cycles == 6);
    CHECK_THAT(a.period, WithinRel(1.0 / 7.0, 1e-4));
    CHECK_THAT(a.decay_ratio, WithinAbs(1.0, 1e-3));
    CHECK_THAT(a.amplitude, WithinRel(2.0, 1e-3));
    y.back() = NAN;
    CHECK(analyze_oscillation(t, y).diverged);
}

TEST_CASE("ZN recovers the ultimate point of a triple lag", "[converter][zn]") {
    const auto plant = testing::proportional_loop(testing::triple_lag(), 120.0, 2e-3);
    const ZnResult r = zn_tune(plant, 1.0);
    const double tu = 2.0 * std::numbers::pi / std::sqrt(3.0);
    CHECK_THAT(r.ku, WithinRel(8.0, 0.05));
    CHECK_THAT(r.tu, WithinRel(tu, 0.05));
    CHECK_THAT(r.kp, WithinRel(0.45 * r.ku, 1e-12));
    CHECK_THAT(r.ki, WithinRel(0.54 * r.ku / r.tu, 1e-12));
}

TEST_CASE("ZN recovers the ultimate point of a second-order plant with sensor lag",
          "[converter][zn][property]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> zeta(0.2, 0.8);
    std::uniform_real_distribution<double> tau(0.2, 2.0);
    for (int trial = 0; trial < 4; ++trial) {
        const testing::SecondOrderWithSensor p{1.0, zeta(rng), tau(rng)};
        const double tu = p.ultimate_period();
        const auto plant = testing::proportional_loop(p.plant(), 40.0 * tu, tu / 2000.0);
        const ZnResult r = zn_tune(plant, 0.1);
        REQUIRE_THAT(r.ku, WithinRel(p.ultimate_gain(), 0.05));
        REQUIRE_THAT(r.tu, WithinRel(tu, 0.05));
    }
}

TEST_CASE("ZN reports plants without an ultimate gain", "[converter][zn]") {
    const auto lag = testing::proportional_loop(testing::first_order_lag(), 20.0, 1e-3);
    ZnOptions o;
    o.kp_max = 1e3;
    CHECK_THROWS_AS(zn_tune(lag, 1.0, o), TuningError);
    const auto triple = testing::proportional_loop(testing::triple_lag(), 120.0, 2e-3);
    try {
        (void)zn_tune(triple, 20.0);
        FAIL("expected TuningError");
    } catch (const TuningError& e) {
        CHECK(e.last_stable_kp() == 0.0);
    }
    CHECK_THROWS_AS(zn_tune(triple, -1.0), UsageError);
}
