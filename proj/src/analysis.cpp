#include "gcsim/analysis.hpp"

#include "gcsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace gcsim {

namespace {

void check_record(std::span<const double> t, std::span<const double> v) {
    if (t.size() != v.size()) {
        throw ReportingError("time and value lengths differ");
    }
    if (t.size() < 2) {
        throw ReportingError("record has fewer than two samples");
    }
}

void check_window(std::span<const double> t, Window w) {
    if (!(w.t1 > w.t0) || w.t0 < t.front() - 1e-12 || w.t1 > t.back() + 1e-12) {
        throw ReportingError("analysis window lies outside the record");
    }
}

/// Trapezoidal integral of f(t, v) over the window, with the signal linearly
/// interpolated at the window edges.
template <typename F>
double integrate(std::span<const double> t, std::span<const double> v, Window w, F&& f) {
    check_record(t, v);
    check_window(t, w);
    const auto begin = std::upper_bound(t.begin(), t.end(), w.t0);
    std::size_t i = begin == t.begin() ? 0 : static_cast<std::size_t>(begin - t.begin()) - 1;
    auto interp = [&](std::size_t k, double x) {
        if (k + 1 >= t.size()) return v.back();
        const double s = (x - t[k]) / (t[k + 1] - t[k]);
        return v[k] + s * (v[k + 1] - v[k]);
    };
    double ta = w.t0;
    double fa = f(ta, interp(i, ta));
    double total = 0.0;
    for (; i + 1 < t.size() && ta < w.t1; ++i) {
        const double tb = std::min(t[i + 1], w.t1);
        if (tb <= ta) continue;
        const double fb = f(tb, tb == t[i + 1] ? v[i + 1] : interp(i, tb));
        total += 0.5 * (fa + fb) * (tb - ta);
        ta = tb;
        fa = fb;
    }
    return total;
}

std::complex<double> correlate(std::span<const double> t, std::span<const double> v, Window w,
                               double hz) {
    const double omega = 2.0 * std::numbers::pi * hz;
    const double re = integrate(t, v, w, [&](double x, double y) { return y * std::sin(omega * x); });
    const double im = integrate(t, v, w, [&](double x, double y) { return y * std::cos(omega * x); });
    return {2.0 * re / w.length(), 2.0 * im / w.length()};
}

}  // namespace

Window steady_window(std::span<const double> t, double hz, int cycles, double startup,
                     int min_cycles) {
    if (t.size() < 2) {
        throw ReportingError("record has fewer than two samples");
    }
    if (!(hz > 0.0) || cycles < 1) {
        throw ReportingError("steady window needs hz > 0 and cycles >= 1");
    }
    const double period = 1.0 / hz;
    const double available = t.back() - std::max(startup, t.front());
    const int whole = static_cast<int>(std::floor(available / period + 1e-9));
    const int n = std::min(cycles, whole);
    if (n < min_cycles) {
        throw ReportingError("insufficient steady-state window: " + std::to_string(std::max(whole, 0)) +
                             " whole cycles after startup, need " + std::to_string(min_cycles));
    }
    return {t.back() - n * period, t.back()};
}

Window tail_window(std::span<const double> t, double length) {
    if (t.size() < 2 || t.back() - t.front() < length - 1e-12) {
        throw ReportingError("record shorter than the requested window");
    }
    return {t.back() - length, t.back()};
}

double mean(std::span<const double> t, std::span<const double> v, Window w) {
    return integrate(t, v, w, [](double, double y) { return y; }) / w.length();
}

double rms(std::span<const double> t, std::span<const double> v, Window w) {
    return std::sqrt(integrate(t, v, w, [](double, double y) { return y * y; }) / w.length());
}

double ac_rms(std::span<const double> t, std::span<const double> v, Window w) {
    const double m = mean(t, v, w);
    const double ms = integrate(t, v, w, [&](double, double y) { return (y - m) * (y - m); });
    return std::sqrt(ms / w.length());
}

double dft_magnitude(std::span<const double> t, std::span<const double> v, Window w, double hz) {
    if (hz == 0.0) {
        return std::abs(mean(t, v, w));
    }
    return std::abs(correlate(t, v, w, hz));
}

double dft_phase(std::span<const double> t, std::span<const double> v, Window w, double hz) {
    return std::arg(correlate(t, v, w, hz));
}

double thd(std::span<const double> t, std::span<const double> v, Window w, double fundamental_hz,
           int max_harmonic) {
    const double f1 = dft_magnitude(t, v, w, fundamental_hz);
    if (!(f1 > 0.0)) {
        return 0.0;
    }
    double sum = 0.0;
    for (int h = 2; h <= max_harmonic; ++h) {
        const double a = dft_magnitude(t, v, w, h * fundamental_hz);
        sum += a * a;
    }
    return std::sqrt(sum) / f1;
}

Extremes extremes(std::span<const double> t, std::span<const double> v, Window w) {
    check_record(t, v);
    check_window(t, w);
    Extremes e{INFINITY, -INFINITY, INFINITY, 0.0};
    bool any = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < w.t0 - 1e-12 || t[i] > w.t1 + 1e-12) continue;
        any = true;
        e.min = std::min(e.min, v[i]);
        e.max = std::max(e.max, v[i]);
        e.min_abs = std::min(e.min_abs, std::abs(v[i]));
        e.max_abs = std::max(e.max_abs, std::abs(v[i]));
    }
    if (!any) {
        throw ReportingError("analysis window contains no samples");
    }
    return e;
}

double fraction_above(std::span<const double> t, std::span<const double> v, Window w,
                      double threshold) {
    check_record(t, v);
    check_window(t, w);
    double above = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double a = std::max(t[i], w.t0);
        const double b = std::min(t[i + 1], w.t1);
        if (b <= a) continue;
        const double h = t[i + 1] - t[i];
        // |v| has a kink where v changes sign; split the interval there.
        auto excess = [&](double x) {
            const double y = v[i] + (x - t[i]) / h * (v[i + 1] - v[i]);
            return std::abs(y) - threshold;
        };
        std::vector<double> cuts{a, b};
        if ((v[i] < 0.0) != (v[i + 1] < 0.0) && v[i + 1] != v[i]) {
            const double tz = t[i] - v[i] * h / (v[i + 1] - v[i]);
            if (tz > a && tz < b) cuts.insert(cuts.begin() + 1, tz);
        }
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double x0 = cuts[k];
            const double x1 = cuts[k + 1];
            const double e0 = excess(x0);
            const double e1 = excess(x1);
            if (e0 > 0.0 && e1 > 0.0) {
                above += x1 - x0;
            } else if (e0 > 0.0 || e1 > 0.0) {
                const double xc = x0 + (x1 - x0) * e0 / (e0 - e1);
                above += e0 > 0.0 ? xc - x0 : x1 - xc;
            }
        }
    }
    return above / w.length();
}

std::vector<double> moving_average(std::span<const double> t, std::span<const double> v,
                                   double period) {
    check_record(t, v);
    std::vector<double> out(v.size());
    // prefix trapezoid integral
    std::vector<double> cum(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) {
        cum[i] = cum[i - 1] + 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
    }
    auto cum_at = [&](double x) {
        if (x <= t.front()) return cum.front();
        if (x >= t.back()) return cum.back();
        const auto it = std::upper_bound(t.begin(), t.end(), x);
        const std::size_t k = static_cast<std::size_t>(it - t.begin()) - 1;
        const double h = x - t[k];
        const double slope = (v[k + 1] - v[k]) / (t[k + 1] - t[k]);
        return cum[k] + h * (v[k] + 0.5 * slope * h);
    };
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double a = std::max(t.front(), t[i] - 0.5 * period);
        const double b = std::min(t.back(), t[i] + 0.5 * period);
        out[i] = b > a ? (cum_at(b) - cum_at(a)) / (b - a) : v[i];
    }
    return out;
}

StepResponse step_response(std::span<const double> t, std::span<const double> v, double target,
                           double t_step, double band) {
    check_record(t, v);
    if (target == 0.0) {
        throw ReportingError("step response needs a nonzero target");
    }
    StepResponse r;
    const double sign = target > 0.0 ? 1.0 : -1.0;
    double peak = -INFINITY;
    double last_outside = t_step;
    bool any = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_step) continue;
        any = true;
        peak = std::max(peak, sign * v[i]);
        if (std::abs(v[i] - target) > band * std::abs(target)) {
            last_outside = t[i];
        }
    }
    if (!any) {
        throw ReportingError("no samples after the step");
    }
    r.overshoot = std::max(0.0, (peak - std::abs(target)) / std::abs(target));
    r.settled = last_outside < t.back();
    r.settling_time = last_outside - t_step;
    return r;
}

}  // namespace gcsim
