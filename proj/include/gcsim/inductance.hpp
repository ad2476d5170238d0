#pragma once

#include "gcsim/circuit.hpp"
#include "gcsim/state.hpp"

#include <string>

namespace gcsim {

/// Small-signal self-inductance of one winding at an operating point (H).
///
/// Every permeance is replaced by its differential permeance at the
/// operating-point flux. Hysteresis resistors and the other windings carry no
/// mmf at low frequency and are shorted. The result is N^2 times the
/// permeance seen at the winding's magnetic port. Throws NumericalError if
/// that port is shorted or the reduced network is singular.
[[nodiscard]] double equivalent_inductance(const HybridNetwork& network, const std::string& winding,
                                           const SystemState& operating_point);

}  // namespace gcsim
