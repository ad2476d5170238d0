#pragma once

// Electric elements and the hybrid electric/magnetic network description.

#include "gcsim/magnetics.hpp"
#include "gcsim/reference.hpp"
#include "gcsim/state.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gcsim {

struct AcVoltageSource {
    double rms = 0.0;
    double hz = 60.0;
    double phase = 0.0;  ///< rad; v(t) = sqrt(2)*rms*sin(2*pi*hz*t + phase)
    [[nodiscard]] double value(double t) const;
};

struct DcVoltageSource {
    double volts = 0.0;
};

/// Ideal current source; the reference current flows a -> b through it.
struct CurrentSource {
    ReferenceProfile reference;
};

struct Resistor {
    double ohms = 1.0;
};

struct Inductor {
    double henries = 1.0;
};

struct Capacitor {
    double farads = 1.0;
};

/// Two-state switch: 1/r_on when gated on, g_off otherwise.
struct Switch {
    double r_on = 1e-3;
    double g_off = 1e-9;
    bool operator==(const Switch&) const = default;
};

/// Piecewise-linear diode, anode at a: threshold in series with r_on when
/// conducting, g_off when blocking.
struct Diode {
    double r_on = 1e-3;
    double g_off = 1e-9;
    double v_threshold = 0.7;
    bool operator==(const Diode&) const = default;
};

using ElectricKind = std::variant<AcVoltageSource, DcVoltageSource, CurrentSource, Resistor,
                                  Inductor, Capacitor, Switch, Diode>;

struct ElectricElement {
    std::string name;
    std::size_t node_a = 0;
    std::size_t node_b = 0;
    ElectricKind kind;
    std::size_t index = 0;  ///< position in the network; set on insertion

    void validate() const;
    [[nodiscard]] bool is_switching() const {
        return std::holds_alternative<Switch>(kind) || std::holds_alternative<Diode>(kind);
    }
};

/// Branch current a -> b for the given branch voltage and conduction state.
///
/// Inductor, capacitor and voltage-source currents are state variables and
/// are read back from the state.
[[nodiscard]] double element_current(const ElectricElement& element, double branch_voltage,
                                     const SystemState& state);

class HybridNetwork;

/// Synchronous control block evaluated at the start of every step.
///
/// Implementations are immutable; their memory lives in
/// SystemState::controller starting at the offset handed out by the network.
class Controller {
public:
    virtual ~Controller() = default;
    [[nodiscard]] virtual std::size_t state_size() const = 0;
    /// Write gate states and controller memory for the step ending at t_next.
    virtual void update(double t_next, const HybridNetwork& network, std::size_t offset,
                        const SystemState& previous, SystemState& next) const = 0;
};

enum class Domain { electric, magnetic };

struct ValidationIssue {
    enum class Kind { dangling_node, disconnected, no_ground, bad_reference, missing_coupling };
    Kind kind;
    Domain domain;
    std::string message;
};

class HybridNetwork {
public:
    std::size_t add_electric_node(const std::string& name);
    std::size_t add_magnetic_node(const std::string& name);
    void set_electric_ground(std::size_t node) { electric_ground_ = node; }
    void set_magnetic_ground(std::size_t node) { magnetic_ground_ = node; }

    std::size_t add(ElectricElement element);
    std::size_t add(PermeanceElement element);
    std::size_t add(HysteresisElement element);
    std::size_t add(WindingGyrator element);
    /// Registers a controller and returns the offset of its state slots.
    std::size_t add(std::shared_ptr<const Controller> controller);

    [[nodiscard]] const std::vector<std::string>& electric_nodes() const { return electric_nodes_; }
    [[nodiscard]] const std::vector<std::string>& magnetic_nodes() const { return magnetic_nodes_; }
    [[nodiscard]] std::optional<std::size_t> electric_ground() const { return electric_ground_; }
    [[nodiscard]] std::optional<std::size_t> magnetic_ground() const { return magnetic_ground_; }

    [[nodiscard]] const std::vector<ElectricElement>& electric() const { return electric_; }
    [[nodiscard]] const std::vector<PermeanceElement>& permeances() const { return permeances_; }
    [[nodiscard]] const std::vector<HysteresisElement>& hysteresis() const { return hysteresis_; }
    [[nodiscard]] const std::vector<WindingGyrator>& windings() const { return windings_; }

    struct ControllerSlot {
        std::shared_ptr<const Controller> controller;
        std::size_t offset = 0;
    };
    [[nodiscard]] const std::vector<ControllerSlot>& controllers() const { return controllers_; }
    [[nodiscard]] std::size_t controller_state_size() const { return controller_state_size_; }

    /// Mutable access for parameter edits after assembly (same topology).
    ElectricElement& electric_at(std::size_t i) { return electric_.at(i); }
    PermeanceElement& permeance_at(std::size_t i) { return permeances_.at(i); }
    HysteresisElement& hysteresis_at(std::size_t i) { return hysteresis_.at(i); }
    WindingGyrator& winding_at(std::size_t i) { return windings_.at(i); }

    [[nodiscard]] std::size_t find_electric(const std::string& name) const;
    [[nodiscard]] std::size_t find_permeance(const std::string& name) const;
    [[nodiscard]] std::size_t find_winding(const std::string& name) const;
    [[nodiscard]] std::size_t find_hysteresis(const std::string& name) const;
    [[nodiscard]] std::size_t electric_node(const std::string& name) const;
    [[nodiscard]] std::size_t magnetic_node(const std::string& name) const;

    /// State with every vector sized for this network and all values zero.
    [[nodiscard]] SystemState zero_state() const;

private:
    std::vector<std::string> electric_nodes_;
    std::vector<std::string> magnetic_nodes_;
    std::optional<std::size_t> electric_ground_;
    std::optional<std::size_t> magnetic_ground_;
    std::vector<ElectricElement> electric_;
    std::vector<PermeanceElement> permeances_;
    std::vector<HysteresisElement> hysteresis_;
    std::vector<WindingGyrator> windings_;
    std::vector<ControllerSlot> controllers_;
    std::size_t controller_state_size_ = 0;
};

/// Structural checks; an empty result means the network is well formed.
[[nodiscard]] std::vector<ValidationIssue> validate(const HybridNetwork& network);

}  // namespace gcsim
