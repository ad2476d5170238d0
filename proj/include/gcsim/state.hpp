#pragma once

#include <cstdint>
#include <vector>

namespace gcsim {

/// Everything the integrator carries from one accepted step to the next.
///
/// Per-element vectors are indexed like the matching element lists of the
/// HybridNetwork. Branch quantities follow the a->b orientation of each
/// element. Magnetic "currents" are flux rates (Wb/s) and magnetic
/// potentials are mmf (A-turn).
struct SystemState {
    double time = 0.0;
    std::uint64_t step = 0;

    std::vector<double> elec_potential;  ///< V, per electric node (ground = 0)
    std::vector<double> mag_potential;   ///< A-turn, per magnetic node

    std::vector<double> branch_voltage;  ///< V, per electric element
    std::vector<double> branch_current;  ///< A, per electric element
    std::vector<char> conducting;        ///< gate / diode state, per electric element

    std::vector<double> flux;        ///< Wb, per permeance
    std::vector<double> flux_rate;   ///< Wb/s, per permeance

    std::vector<double> hysteresis_flow;  ///< Wb/s, per hysteresis element

    std::vector<double> gyrator_current;  ///< A, electric port, per winding
    std::vector<double> gyrator_flow;     ///< Wb/s, magnetic port, per winding

    std::vector<double> controller;  ///< controller-owned slots

    std::vector<double> solution;  ///< last MNA solution vector (warm start)

    bool operator==(const SystemState&) const = default;
};

}  // namespace gcsim
