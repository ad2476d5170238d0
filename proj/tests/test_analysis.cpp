#include <catch_amalgamated.hpp>

#include "gcsim/analysis.hpp"
#include "gcsim/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace gcsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct Signal {
    std::vector<double> t;
    std::vector<double> v;
};

template <class F>
Signal sample(double duration, double dt, F f) {
    Signal s;
    const auto n = static_cast<std::size_t>(std::llround(duration / dt));
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * dt;
        s.t.push_back(t);
        s.v.push_back(f(t));
    }
    return s;
}

}  // namespace

TEST_CASE("steady window covers whole cycles at the end", "[analysis]") {
    const auto s = sample(0.2, 1e-5, [](double) { return 0.0; });
    const Window w = steady_window(s.t, 60.0);
    CHECK_THAT(w.t1, WithinAbs(0.2, 1e-12));
    CHECK_THAT(w.length(), WithinRel(5.0 / 60.0, 1e-12));
    const Window w3 = steady_window(s.t, 60.0, 20, 0.15);
    CHECK_THAT(w3.length(), WithinRel(3.0 / 60.0, 1e-12));
    CHECK_THROWS_AS(steady_window(s.t, 60.0, 5, 0.19), ReportingError);
    CHECK_THAT(tail_window(s.t, 0.02).t0, WithinAbs(0.18, 1e-12));
    CHECK_THROWS_AS(tail_window(s.t, 0.3), ReportingError);
}

TEST_CASE("sinusoid statistics match closed forms", "[analysis]") {
    const double a = 3.0;
    const double phase = 0.4;
    const auto s = sample(0.1, 1e-5, [&](double t) { return 1.5 + a * std::sin(two_pi * 60.0 * t + phase); });
    const Window w{0.1 - 3.0 / 60.0, 0.1};
    CHECK_THAT(mean(s.t, s.v, w), WithinAbs(1.5, 1e-6));
    CHECK_THAT(ac_rms(s.t, s.v, w), WithinRel(a / std::sqrt(2.0), 1e-6));
    CHECK_THAT(rms(s.t, s.v, w), WithinRel(std::sqrt(1.5 * 1.5 + a * a / 2.0), 1e-6));
    CHECK_THAT(dft_magnitude(s.t, s.v, w, 60.0), WithinRel(a, 1e-6));
    CHECK_THAT(dft_phase(s.t, s.v, w, 60.0), WithinAbs(phase, 1e-5));
    CHECK_THAT(dft_magnitude(s.t, s.v, w, 0.0), WithinAbs(1.5, 1e-6));
    CHECK_THAT(dft_magnitude(s.t, s.v, w, 120.0), WithinAbs(0.0, 1e-5));
    const auto e = extremes(s.t, s.v, w);
    CHECK_THAT(e.max, WithinAbs(4.5, 1e-6));
    CHECK_THAT(e.min, WithinAbs(-1.5, 1e-6));
    CHECK_THAT(e.min_abs, WithinAbs(0.0, 1e-3));
    CHECK_THAT(e.max_abs, WithinAbs(4.5, 1e-6));
}

TEST_CASE("THD of a known harmonic mix", "[analysis]") {
    const auto s = sample(0.1, 1e-5, [](double t) {
        return 10.0 * std::sin(two_pi * 60.0 * t) + 0.3 * std::sin(two_pi * 180.0 * t + 1.0) +
               0.4 * std::sin(two_pi * 300.0 * t);
    });
    const Window w{0.05, 0.1};
    CHECK_THAT(thd(s.t, s.v, w, 60.0), WithinRel(0.05, 1e-5));
    CHECK_THAT(thd(s.t, s.v, w, 60.0, 4), WithinRel(0.03, 1e-5));
}

TEST_CASE("fraction above a threshold", "[analysis]") {
    const auto s = sample(0.05, 1e-6, [](double t) { return std::sin(two_pi * 60.0 * t); });
    const Window w{0.0, 3.0 / 60.0};
    // |sin| > 0.5 for two thirds of every half cycle
    CHECK_THAT(fraction_above(s.t, s.v, w, 0.5), WithinAbs(2.0 / 3.0, 1e-5));
    CHECK(fraction_above(s.t, s.v, w, 2.0) == 0.0);
}

TEST_CASE("moving average removes a full-period ripple", "[analysis]") {
    const auto s = sample(0.01, 1e-6, [](double t) { return 2.0 + std::sin(two_pi * 50e3 * t); });
    const auto avg = moving_average(s.t, s.v, 1.0 / 50e3);
    REQUIRE(avg.size() == s.v.size());
    for (std::size_t k = 100; k + 100 < avg.size(); k += 37) {
        REQUIRE_THAT(avg[k], WithinAbs(2.0, 1e-3));
    }
}

TEST_CASE("step response of a second-order underdamped signal", "[analysis]") {
    const double zeta = 0.3;
    const double wn = 2000.0;
    const double wd = wn * std::sqrt(1.0 - zeta * zeta);
    const double t0 = 0.002;
    const auto s = sample(0.02, 1e-6, [&](double t) {
        if (t < t0) return 0.0;
        const double u = t - t0;
        return 5.0 * (1.0 - std::exp(-zeta * wn * u) *
                                (std::cos(wd * u) + zeta / std::sqrt(1.0 - zeta * zeta) * std::sin(wd * u)));
    });
    const auto r = step_response(s.t, s.v, 5.0, t0, 0.02);
    CHECK_THAT(r.overshoot, WithinRel(std::exp(-zeta * std::numbers::pi / std::sqrt(1.0 - zeta * zeta)), 1e-3));
    CHECK(r.settled);
    // envelope bound: exp(-zeta wn t) / sqrt(1 - zeta^2) = 0.02
    const double bound = -std::log(0.02 * std::sqrt(1.0 - zeta * zeta)) / (zeta * wn);
    CHECK(r.settling_time <= bound);
    CHECK(r.settling_time > 0.5 * bound);
}

TEST_CASE("RMS is invariant under sample-time jitter of the window edges", "[analysis][property]") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> edge(0.0, 1e-5);
    const auto s = sample(0.1, 1e-5, [](double t) { return std::sin(two_pi * 60.0 * t); });
    for (int trial = 0; trial < 50; ++trial) {
        const double t0 = 0.02 + edge(rng);
        const Window w{t0, t0 + 4.0 / 60.0};
        REQUIRE_THAT(rms(s.t, s.v, w), WithinRel(1.0 / std::sqrt(2.0), 1e-6));
    }
}
