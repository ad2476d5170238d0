#pragma once

// Linear state-space plants under proportional control, integrated with RK4,
// as oracles for the Ziegler-Nichols tuner.

#include "gcsim/converter.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace gcsim::testing {

struct LinearPlant {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::RowVectorXd c;
};

/// Unit-step response of the loop u = kp*(1 - y).
inline ProportionalPlant proportional_loop(LinearPlant plant, double duration, double dt) {
    return [plant = std::move(plant), duration, dt](double kp) {
        ProportionalResponse r;
        Eigen::VectorXd x = Eigen::VectorXd::Zero(plant.a.rows());
        auto f = [&](const Eigen::VectorXd& s) -> Eigen::VectorXd {
            const double u = kp * (1.0 - plant.c.dot(s));
            return plant.a * s + plant.b * u;
        };
        const auto steps = static_cast<long>(std::llround(duration / dt));
        for (long k = 0; k <= steps; ++k) {
            const double y = plant.c.dot(x);
            r.time.push_back(static_cast<double>(k) * dt);
            r.output.push_back(y);
            if (!std::isfinite(y) || std::abs(y) > 1e12) {
                r.diverged = true;
                break;
            }
            const Eigen::VectorXd k1 = f(x);
            const Eigen::VectorXd k2 = f(x + 0.5 * dt * k1);
            const Eigen::VectorXd k3 = f(x + 0.5 * dt * k2);
            const Eigen::VectorXd k4 = f(x + dt * k3);
            x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return r;
    };
}

/// wn^2/(s^2 + 2 zeta wn s + wn^2) seen through a sensor lag 1/(tau s + 1).
///
/// Routh on tau s^3 + (1 + 2 zeta wn tau) s^2 + (2 zeta wn + tau wn^2) s + wn^2 (1 + K)
/// gives the ultimate gain and frequency below.
struct SecondOrderWithSensor {
    double wn = 1.0;
    double zeta = 0.5;
    double tau = 0.5;

    [[nodiscard]] LinearPlant plant() const {
        LinearPlant p;
        p.a = Eigen::MatrixXd::Zero(3, 3);
        p.a << 0.0, 1.0, 0.0,
            -wn * wn, -2.0 * zeta * wn, 0.0,
            1.0 / tau, 0.0, -1.0 / tau;
        p.b = Eigen::VectorXd::Zero(3);
        p.b[1] = wn * wn;
        p.c = Eigen::RowVectorXd::Zero(3);
        p.c[2] = 1.0;
        return p;
    }
    [[nodiscard]] double ultimate_gain() const {
        return (1.0 + 2.0 * zeta * wn * tau) * (2.0 * zeta * wn + tau * wn * wn) / (tau * wn * wn) -
               1.0;
    }
    [[nodiscard]] double ultimate_period() const {
        const double w = std::sqrt((2.0 * zeta * wn + tau * wn * wn) / tau);
        return 2.0 * std::numbers::pi / w;
    }
};

/// 1/(s + 1)^3: ultimate gain 8 at sqrt(3) rad/s.
inline LinearPlant triple_lag() {
    LinearPlant p;
    p.a = Eigen::MatrixXd::Zero(3, 3);
    p.a << -1.0, 0.0, 0.0,
        1.0, -1.0, 0.0,
        0.0, 1.0, -1.0;
    p.b = Eigen::VectorXd::Zero(3);
    p.b[0] = 1.0;
    p.c = Eigen::RowVectorXd::Zero(3);
    p.c[2] = 1.0;
    return p;
}

inline LinearPlant first_order_lag() {
    LinearPlant p;
    p.a = Eigen::MatrixXd::Constant(1, 1, -1.0);
    p.b = Eigen::VectorXd::Ones(1);
    p.c = Eigen::RowVectorXd::Ones(1);
    return p;
}

}  // namespace gcsim::testing
