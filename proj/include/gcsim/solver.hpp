#pragma once

// Fixed-step implicit transient integration of a hybrid network.
//
// The electric and magnetic domains are assembled into one modified nodal
// system. Unknowns are node potentials (V and A-turn) plus branch variables
// for voltage sources, inductors, permeance fluxes, hysteresis flows and both
// ports of every winding. Nonlinear permeances are resolved by Newton
// iteration; switch and diode states are made self-consistent by re-solving
// the step until no device changes state.

#include "gcsim/circuit.hpp"
#include "gcsim/state.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gcsim {

enum class Integration { trapezoidal, backward_euler };

struct SolverConfig {
    double dt = 10e-6;
    double newton_tol = 1e-9;
    int newton_max_iter = 50;
    int max_switch_resolution_passes = 16;
    Integration method = Integration::trapezoidal;
    /// Take a backward-Euler step at start-up and whenever a switch or diode
    /// changes state, which suppresses trapezoidal ringing after
    /// discontinuities.
    bool damped_restart = true;

    void validate() const;
    bool operator==(const SolverConfig&) const = default;
};

struct StepReport {
    int newton_iterations = 0;  ///< summed over switch-resolution passes
    int switch_passes = 0;
    bool backward_euler = false;
    double kcl_residual_electric = 0.0;  ///< A
    double kcl_residual_magnetic = 0.0;  ///< Wb/s
};

/// Energy bookkeeping over one accepted step (W).
///
/// Residual is source - dissipated - d(stored)/dt - numerical_damping. Branch
/// powers use the step's own rule (midpoint values for trapezoidal steps,
/// end values for backward Euler) and stored energy uses exact differences.
/// numerical_damping is nonzero only on backward-Euler steps.
struct PowerBalance {
    double source = 0.0;
    double dissipated = 0.0;
    double stored_rate = 0.0;
    double numerical_damping = 0.0;
    double residual = 0.0;
};

/// Uniformly sampled named waveforms.
class TimeSeries {
public:
    struct Channel {
        std::string name;
        std::string unit;
        std::vector<double> values;
        bool operator==(const Channel&) const = default;
    };

    TimeSeries() = default;
    explicit TimeSeries(std::vector<std::string> names, std::vector<std::string> units);

    void append(double t, const std::vector<double>& sample);
    void add_channel(std::string name, std::string unit, std::vector<double> values);

    [[nodiscard]] std::size_t size() const { return time_.size(); }
    [[nodiscard]] bool empty() const { return time_.empty(); }
    [[nodiscard]] const std::vector<double>& time() const { return time_; }
    [[nodiscard]] const std::vector<Channel>& channels() const { return channels_; }
    [[nodiscard]] bool has(const std::string& name) const;
    /// Throws ReportingError if the channel is missing.
    [[nodiscard]] const Channel& channel(const std::string& name) const;
    [[nodiscard]] double dt() const;

    bool operator==(const TimeSeries&) const = default;

private:
    std::vector<double> time_;
    std::vector<Channel> channels_;
};

/// A quantity recorded once per accepted step.
struct Probe {
    std::string name;
    std::string unit;
    std::function<double(const HybridNetwork&, const SystemState&)> read;

    static Probe flux(const HybridNetwork& net, const std::string& permeance, std::string name);
    static Probe flux_rate(const HybridNetwork& net, const std::string& permeance,
                           std::string name);
    static Probe winding_voltage(const HybridNetwork& net, const std::string& winding,
                                 std::string name);
    static Probe winding_current(const HybridNetwork& net, const std::string& winding,
                                 std::string name);
    static Probe winding_flow(const HybridNetwork& net, const std::string& winding,
                              std::string name);
    static Probe element_current(const HybridNetwork& net, const std::string& element,
                                 std::string name);
    static Probe element_voltage(const HybridNetwork& net, const std::string& element,
                                 std::string name);
    static Probe node_voltage(const HybridNetwork& net, const std::string& node,
                              std::string name);
    static Probe controller_slot(std::size_t slot, std::string name, std::string unit);
};

using StepObserver =
    std::function<void(const SystemState& previous, const SystemState& next, const StepReport&)>;

class Solver {
public:
    Solver(HybridNetwork network, SolverConfig config);

    [[nodiscard]] const HybridNetwork& network() const { return network_; }
    [[nodiscard]] const SolverConfig& config() const { return config_; }

    /// Advance by one dt. Throws StepFailure on Newton non-convergence or
    /// unresolved switch chatter.
    [[nodiscard]] SystemState step(const SystemState& state, StepReport* report = nullptr) const;

    /// Records every probe at the initial state and after each step.
    [[nodiscard]] TimeSeries run(const SystemState& initial, double duration,
                                 const std::vector<Probe>& probes,
                                 const StepObserver& observer = {}) const;

    [[nodiscard]] PowerBalance power_balance(const SystemState& previous,
                                             const SystemState& next,
                                             bool backward_euler) const;

    /// Total dissipation and source power at one instant (W).
    [[nodiscard]] double source_power(const SystemState& state) const;
    [[nodiscard]] double dissipated_power(const SystemState& state) const;

    [[nodiscard]] std::size_t unknowns() const { return size_; }

private:
    struct Coefficients {
        double alpha;  // d/dt y_{n+1} = alpha*(y_{n+1} - y_n) - beta*(d/dt y)_n
        double beta;
    };

    void build_layout();
    [[nodiscard]] Coefficients coefficients(bool backward_euler) const;
    void assemble(const Eigen::VectorXd& x, const SystemState& prev, const SystemState& next,
                  double t_next, Coefficients c, Eigen::MatrixXd* jacobian,
                  Eigen::VectorXd& residual) const;
    bool newton(const SystemState& prev, const SystemState& next, double t_next, Coefficients c,
                Eigen::VectorXd& x, int& iterations, std::string& diagnostic) const;
    void unpack(const SystemState& prev, SystemState& next, const Eigen::VectorXd& x,
                Coefficients c) const;

    HybridNetwork network_;
    SolverConfig config_;

    std::vector<int> elec_index_;  // node -> unknown, -1 for ground
    std::vector<int> mag_index_;
    std::vector<int> elec_branch_;  // element -> branch unknown or -1
    std::vector<int> perm_branch_;
    std::vector<int> hyst_branch_;
    std::vector<int> wind_current_;
    std::vector<int> wind_flow_;
    std::vector<double> scale_;  // per-unknown absolute tolerance scale
    std::size_t size_ = 0;
    bool nonlinear_ = false;
};

/// Free-function forms of Solver::step and Solver::run.
[[nodiscard]] SystemState step(const HybridNetwork& network, const SystemState& state,
                               const SolverConfig& config);
[[nodiscard]] TimeSeries run(const HybridNetwork& network, const SystemState& initial,
                             const SolverConfig& config, double duration,
                             const std::vector<Probe>& probes);

}  // namespace gcsim
