#include "gcsim/solver.hpp"

#include "gcsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gcsim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Convergence floors per unknown kind, in the unknown's own units.
constexpr double floor_volt = 1.0;
constexpr double floor_mmf = 1.0;
constexpr double floor_current = 1e-2;
constexpr double floor_flux = 1e-4;
constexpr double floor_flow = 1.0;

}  // namespace

void SolverConfig::validate() const {
    if (!(dt > 0.0)) {
        throw ConstructionError("solver: dt must be positive");
    }
    if (!(newton_tol > 0.0)) {
        throw ConstructionError("solver: newton_tol must be positive");
    }
    if (newton_max_iter < 1 || max_switch_resolution_passes < 1) {
        throw ConstructionError("solver: iteration limits must be >= 1");
    }
}

// ---------------------------------------------------------------------------
// TimeSeries

TimeSeries::TimeSeries(std::vector<std::string> names, std::vector<std::string> units) {
    if (names.size() != units.size()) {
        throw UsageError("time series: names and units differ in length");
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        channels_.push_back({std::move(names[i]), std::move(units[i]), {}});
    }
}

void TimeSeries::append(double t, const std::vector<double>& sample) {
    if (sample.size() != channels_.size()) {
        throw UsageError("time series: sample width does not match channel count");
    }
    time_.push_back(t);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        channels_[i].values.push_back(sample[i]);
    }
}

void TimeSeries::add_channel(std::string name, std::string unit, std::vector<double> values) {
    if (values.size() != time_.size()) {
        throw UsageError("time series: channel '" + name + "' has the wrong length");
    }
    if (has(name)) {
        throw UsageError("time series: duplicate channel '" + name + "'");
    }
    channels_.push_back({std::move(name), std::move(unit), std::move(values)});
}

bool TimeSeries::has(const std::string& name) const {
    return std::any_of(channels_.begin(), channels_.end(),
                       [&](const Channel& c) { return c.name == name; });
}

const TimeSeries::Channel& TimeSeries::channel(const std::string& name) const {
    for (const Channel& c : channels_) {
        if (c.name == name) {
            return c;
        }
    }
    throw ReportingError("missing channel '" + name + "'");
}

double TimeSeries::dt() const { return time_.size() < 2 ? 0.0 : time_[1] - time_[0]; }

// ---------------------------------------------------------------------------
// Probes

Probe Probe::flux(const HybridNetwork& net, const std::string& permeance, std::string name) {
    const std::size_t k = net.find_permeance(permeance);
    return {std::move(name), "Wb", [k](const HybridNetwork&, const SystemState& s) {
                return s.flux[k];
            }};
}

Probe Probe::flux_rate(const HybridNetwork& net, const std::string& permeance,
                       std::string name) {
    const std::size_t k = net.find_permeance(permeance);
    return {std::move(name), "Wb/s", [k](const HybridNetwork&, const SystemState& s) {
                return s.flux_rate[k];
            }};
}

Probe Probe::winding_voltage(const HybridNetwork& net, const std::string& winding,
                             std::string name) {
    const std::size_t k = net.find_winding(winding);
    return {std::move(name), "V", [k](const HybridNetwork& n, const SystemState& s) {
                const WindingGyrator& w = n.windings()[k];
                return s.elec_potential[w.elec_p] - s.elec_potential[w.elec_n];
            }};
}

Probe Probe::winding_current(const HybridNetwork& net, const std::string& winding,
                             std::string name) {
    const std::size_t k = net.find_winding(winding);
    return {std::move(name), "A", [k](const HybridNetwork&, const SystemState& s) {
                return s.gyrator_current[k];
            }};
}

Probe Probe::winding_flow(const HybridNetwork& net, const std::string& winding,
                          std::string name) {
    const std::size_t k = net.find_winding(winding);
    return {std::move(name), "Wb/s", [k](const HybridNetwork&, const SystemState& s) {
                return s.gyrator_flow[k];
            }};
}

Probe Probe::element_current(const HybridNetwork& net, const std::string& element,
                             std::string name) {
    const std::size_t k = net.find_electric(element);
    return {std::move(name), "A", [k](const HybridNetwork&, const SystemState& s) {
                return s.branch_current[k];
            }};
}

Probe Probe::element_voltage(const HybridNetwork& net, const std::string& element,
                             std::string name) {
    const std::size_t k = net.find_electric(element);
    return {std::move(name), "V", [k](const HybridNetwork&, const SystemState& s) {
                return s.branch_voltage[k];
            }};
}

Probe Probe::node_voltage(const HybridNetwork& net, const std::string& node, std::string name) {
    const std::size_t k = net.electric_node(node);
    return {std::move(name), "V", [k](const HybridNetwork&, const SystemState& s) {
                return s.elec_potential[k];
            }};
}

Probe Probe::controller_slot(std::size_t slot, std::string name, std::string unit) {
    return {std::move(name), std::move(unit), [slot](const HybridNetwork&, const SystemState& s) {
                return s.controller.at(slot);
            }};
}

// ---------------------------------------------------------------------------
// Solver

Solver::Solver(HybridNetwork network, SolverConfig config)
    : network_(std::move(network)), config_(config) {
    config_.validate();
    build_layout();
}

void Solver::build_layout() {
    const HybridNetwork& net = network_;
    int next = 0;
    auto index_nodes = [&](const std::vector<std::string>& nodes, std::optional<std::size_t> ground,
                           std::vector<int>& out, double floor) {
        out.assign(nodes.size(), -1);
        if (nodes.empty()) {
            return;
        }
        if (!ground || *ground >= nodes.size()) {
            throw ConstructionError("solver: network domain without ground");
        }
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            if (n != *ground) {
                out[n] = next++;
                scale_.push_back(floor);
            }
        }
    };
    index_nodes(net.electric_nodes(), net.electric_ground(), elec_index_, floor_volt);
    index_nodes(net.magnetic_nodes(), net.magnetic_ground(), mag_index_, floor_mmf);

    elec_branch_.assign(net.electric().size(), -1);
    for (std::size_t i = 0; i < net.electric().size(); ++i) {
        const auto& kind = net.electric()[i].kind;
        if (std::holds_alternative<AcVoltageSource>(kind) ||
            std::holds_alternative<DcVoltageSource>(kind) || std::holds_alternative<Inductor>(kind)) {
            elec_branch_[i] = next++;
            scale_.push_back(floor_current);
        }
    }
    perm_branch_.assign(net.permeances().size(), -1);
    for (std::size_t i = 0; i < net.permeances().size(); ++i) {
        perm_branch_[i] = next++;
        scale_.push_back(floor_flux);
        if (net.permeances()[i].kind == PermeanceKind::nonlinear_core) {
            nonlinear_ = true;
        }
    }
    hyst_branch_.assign(net.hysteresis().size(), -1);
    for (std::size_t i = 0; i < net.hysteresis().size(); ++i) {
        hyst_branch_[i] = next++;
        scale_.push_back(floor_flow);
    }
    wind_current_.assign(net.windings().size(), -1);
    wind_flow_.assign(net.windings().size(), -1);
    for (std::size_t i = 0; i < net.windings().size(); ++i) {
        wind_current_[i] = next++;
        scale_.push_back(floor_current);
        wind_flow_[i] = next++;
        scale_.push_back(floor_flow);
    }
    size_ = static_cast<std::size_t>(next);
}

Solver::Coefficients Solver::coefficients(bool backward_euler) const {
    if (backward_euler) {
        return {1.0 / config_.dt, 0.0};
    }
    return {2.0 / config_.dt, 1.0};
}

void Solver::assemble(const Eigen::VectorXd& x, const SystemState& prev, const SystemState& next,
                      double t_next, Coefficients c, Eigen::MatrixXd* jac,
                      Eigen::VectorXd& f) const {
    const HybridNetwork& net = network_;
    f.setZero(static_cast<Eigen::Index>(size_));
    if (jac) {
        jac->setZero(static_cast<Eigen::Index>(size_), static_cast<Eigen::Index>(size_));
    }
    auto val = [&](int idx) { return idx < 0 ? 0.0 : x[idx]; };
    auto addf = [&](int row, double v) {
        if (row >= 0) f[row] += v;
    };
    auto addj = [&](int row, int col, double v) {
        if (jac && row >= 0 && col >= 0) (*jac)(row, col) += v;
    };
    auto conductance = [&](int a, int b, double g, double i0) {
        const double i = g * (val(a) - val(b)) + i0;
        addf(a, i);
        addf(b, -i);
        addj(a, a, g);
        addj(a, b, -g);
        addj(b, a, -g);
        addj(b, b, g);
    };
    auto branch_kcl = [&](int a, int b, int k, double coef) {
        const double i = coef * x[k];
        addf(a, i);
        addf(b, -i);
        addj(a, k, coef);
        addj(b, k, -coef);
    };

    for (std::size_t e = 0; e < net.electric().size(); ++e) {
        const ElectricElement& el = net.electric()[e];
        const int a = elec_index_[el.node_a];
        const int b = elec_index_[el.node_b];
        const int k = elec_branch_[e];
        const bool on = next.conducting[e] != 0;
        std::visit(
            overloaded{
                [&](const Resistor& r) { conductance(a, b, 1.0 / r.ohms, 0.0); },
                [&](const Switch& s) { conductance(a, b, on ? 1.0 / s.r_on : s.g_off, 0.0); },
                [&](const Diode& d) {
                    if (on) {
                        conductance(a, b, 1.0 / d.r_on, -d.v_threshold / d.r_on);
                    } else {
                        conductance(a, b, d.g_off, 0.0);
                    }
                },
                [&](const Capacitor& cap) {
                    const double g = c.alpha * cap.farads;
                    const double i0 =
                        -(g * prev.branch_voltage[e] + c.beta * prev.branch_current[e]);
                    conductance(a, b, g, i0);
                },
                [&](const CurrentSource& s) {
                    const double i = s.reference.value(t_next);
                    addf(a, i);
                    addf(b, -i);
                },
                [&](const AcVoltageSource& s) {
                    branch_kcl(a, b, k, 1.0);
                    f[k] += val(a) - val(b) - s.value(t_next);
                    addj(k, a, 1.0);
                    addj(k, b, -1.0);
                },
                [&](const DcVoltageSource& s) {
                    branch_kcl(a, b, k, 1.0);
                    f[k] += val(a) - val(b) - s.volts;
                    addj(k, a, 1.0);
                    addj(k, b, -1.0);
                },
                [&](const Inductor& l) {
                    branch_kcl(a, b, k, 1.0);
                    f[k] += val(a) - val(b) -
                            l.henries * c.alpha * (x[k] - prev.branch_current[e]) +
                            c.beta * prev.branch_voltage[e];
                    addj(k, a, 1.0);
                    addj(k, b, -1.0);
                    addj(k, k, -l.henries * c.alpha);
                },
            },
            el.kind);
    }

    for (std::size_t p = 0; p < net.permeances().size(); ++p) {
        const PermeanceElement& el = net.permeances()[p];
        const int a = mag_index_[el.node_a];
        const int b = mag_index_[el.node_b];
        const int k = perm_branch_[p];
        const double phi = x[k];
        const double flow = c.alpha * (phi - prev.flux[p]) - c.beta * prev.flux_rate[p];
        addf(a, flow);
        addf(b, -flow);
        addj(a, k, c.alpha);
        addj(b, k, -c.alpha);
        double mmf = 0.0;
        double dmmf = 0.0;
        if (el.kind == PermeanceKind::nonlinear_core) {
            const BHMaterial& m = *el.material;
            const double h = h_of_b(m, phi / el.area);
            mmf = h * el.length;
            dmmf = el.length / (el.area * db_dh(m, h));
        } else {
            const double perm = el.permeance();
            mmf = phi / perm;
            dmmf = 1.0 / perm;
        }
        f[k] += val(a) - val(b) - mmf;
        addj(k, a, 1.0);
        addj(k, b, -1.0);
        addj(k, k, -dmmf);
    }

    for (std::size_t h = 0; h < net.hysteresis().size(); ++h) {
        const HysteresisElement& el = net.hysteresis()[h];
        const int a = mag_index_[el.node_a];
        const int b = mag_index_[el.node_b];
        const int k = hyst_branch_[h];
        branch_kcl(a, b, k, 1.0);
        f[k] += val(a) - val(b) - el.r_mag * x[k];
        addj(k, a, 1.0);
        addj(k, b, -1.0);
        addj(k, k, -el.r_mag);
    }

    for (std::size_t w = 0; w < net.windings().size(); ++w) {
        const WindingGyrator& el = net.windings()[w];
        const int p = elec_index_[el.elec_p];
        const int n = elec_index_[el.elec_n];
        const int a = mag_index_[el.mag_a];
        const int b = mag_index_[el.mag_b];
        const int ki = wind_current_[w];
        const int kw = wind_flow_[w];
        const double gain = el.polarity * static_cast<double>(el.turns);
        branch_kcl(p, n, ki, 1.0);
        branch_kcl(a, b, kw, -1.0);  // winding flux leaves the port at mag_a
        f[ki] += val(p) - val(n) - gain * x[kw];
        addj(ki, p, 1.0);
        addj(ki, n, -1.0);
        addj(ki, kw, -gain);
        f[kw] += val(a) - val(b) - gain * x[ki];
        addj(kw, a, 1.0);
        addj(kw, b, -1.0);
        addj(kw, ki, -gain);
    }
}

bool Solver::newton(const SystemState& prev, const SystemState& next, double t_next,
                    Coefficients c, Eigen::VectorXd& x, int& iterations,
                    std::string& diagnostic) const {
    Eigen::MatrixXd jac;
    Eigen::VectorXd f;
    const int max_iter = nonlinear_ ? config_.newton_max_iter : 1;
    for (int it = 0; it < max_iter; ++it) {
        assemble(x, prev, next, t_next, c, &jac, f);
        ++iterations;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
        Eigen::VectorXd dx = lu.solve(-f);
        if (!dx.allFinite()) {
            diagnostic = "singular or ill-conditioned system";
            return false;
        }
        if (nonlinear_) {
            // Keep each nonlinear flux update within half the saturation
            // flux so Newton does not jump across the knee.
            double scale = 1.0;
            for (std::size_t p = 0; p < network_.permeances().size(); ++p) {
                const PermeanceElement& el = network_.permeances()[p];
                if (el.kind != PermeanceKind::nonlinear_core) continue;
                const double limit = 0.5 * el.material->b_sat * el.area;
                const double d = std::abs(dx[perm_branch_[p]]);
                if (d > limit) scale = std::min(scale, limit / d);
            }
            dx *= scale;
        }
        x += dx;
        if (!nonlinear_) {
            return true;
        }
        bool converged = true;
        double worst = 0.0;
        Eigen::Index worst_i = 0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double tol = config_.newton_tol * std::max(std::abs(x[i]), scale_[i]);
            const double ratio = std::abs(dx[i]) / tol;
            if (ratio > 1.0) {
                converged = false;
            }
            if (ratio > worst) {
                worst = ratio;
                worst_i = i;
            }
        }
        if (converged) {
            return true;
        }
        if (it + 1 == max_iter) {
            std::ostringstream os;
            os << "Newton did not converge in " << max_iter << " iterations (unknown " << worst_i
               << " update " << dx[worst_i] << ")";
            diagnostic = os.str();
        }
    }
    return false;
}

void Solver::unpack(const SystemState& prev, SystemState& next, const Eigen::VectorXd& x,
                    Coefficients c) const {
    const HybridNetwork& net = network_;
    auto val = [&](int idx) { return idx < 0 ? 0.0 : x[idx]; };
    for (std::size_t n = 0; n < elec_index_.size(); ++n) {
        next.elec_potential[n] = val(elec_index_[n]);
    }
    for (std::size_t n = 0; n < mag_index_.size(); ++n) {
        next.mag_potential[n] = val(mag_index_[n]);
    }
    for (std::size_t e = 0; e < net.electric().size(); ++e) {
        const ElectricElement& el = net.electric()[e];
        const double v = next.elec_potential[el.node_a] - next.elec_potential[el.node_b];
        next.branch_voltage[e] = v;
        if (elec_branch_[e] >= 0) {
            next.branch_current[e] = x[elec_branch_[e]];
        } else if (const auto* cap = std::get_if<Capacitor>(&el.kind)) {
            next.branch_current[e] = cap->farads * c.alpha * (v - prev.branch_voltage[e]) -
                                     c.beta * prev.branch_current[e];
        } else {
            next.branch_current[e] = element_current(el, v, next);
        }
    }
    for (std::size_t p = 0; p < net.permeances().size(); ++p) {
        const double phi = x[perm_branch_[p]];
        next.flux[p] = phi;
        next.flux_rate[p] = c.alpha * (phi - prev.flux[p]) - c.beta * prev.flux_rate[p];
    }
    for (std::size_t h = 0; h < net.hysteresis().size(); ++h) {
        next.hysteresis_flow[h] = x[hyst_branch_[h]];
    }
    for (std::size_t w = 0; w < net.windings().size(); ++w) {
        next.gyrator_current[w] = x[wind_current_[w]];
        next.gyrator_flow[w] = x[wind_flow_[w]];
    }
    next.solution.assign(x.data(), x.data() + x.size());
}

SystemState Solver::step(const SystemState& state, StepReport* report) const {
    const HybridNetwork& net = network_;
    StepReport local;
    StepReport& rep = report ? *report : local;
    rep = StepReport{};

    SystemState next = state;
    next.step = state.step + 1;
    const double exact = static_cast<double>(state.step) * config_.dt;
    next.time = state.time == exact ? static_cast<double>(next.step) * config_.dt
                                    : state.time + config_.dt;
    const double t_next = next.time;

    for (const auto& slot : net.controllers()) {
        slot.controller->update(t_next, net, slot.offset, state, next);
    }
    bool discrete_change = next.conducting != state.conducting;

    bool be = config_.method == Integration::backward_euler ||
              (config_.damped_restart && (state.step == 0 || discrete_change));

    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size_));
    if (state.solution.size() == size_) {
        x = Eigen::Map<const Eigen::VectorXd>(state.solution.data(),
                                              static_cast<Eigen::Index>(size_));
    }

    for (int pass = 1;; ++pass) {
        rep.switch_passes = pass;
        std::string diagnostic;
        if (!newton(state, next, t_next, coefficients(be), x, rep.newton_iterations, diagnostic)) {
            throw StepFailure(diagnostic, t_next);
        }
        unpack(state, next, x, coefficients(be));
        bool changed = false;
        for (std::size_t e = 0; e < net.electric().size(); ++e) {
            const auto* d = std::get_if<Diode>(&net.electric()[e].kind);
            if (!d) continue;
            if (next.conducting[e] && next.branch_current[e] < 0.0) {
                next.conducting[e] = 0;
                changed = true;
            } else if (!next.conducting[e] && next.branch_voltage[e] > d->v_threshold) {
                next.conducting[e] = 1;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
        if (pass >= config_.max_switch_resolution_passes) {
            throw StepFailure("switch/diode states did not settle after " +
                                  std::to_string(pass) + " passes",
                              t_next);
        }
        be = be || config_.damped_restart;
    }
    rep.backward_euler = be;

    Eigen::VectorXd f;
    assemble(x, state, next, t_next, coefficients(be), nullptr, f);
    for (std::size_t n = 0; n < elec_index_.size(); ++n) {
        if (elec_index_[n] >= 0) {
            rep.kcl_residual_electric =
                std::max(rep.kcl_residual_electric, std::abs(f[elec_index_[n]]));
        }
    }
    for (std::size_t n = 0; n < mag_index_.size(); ++n) {
        if (mag_index_[n] >= 0) {
            rep.kcl_residual_magnetic =
                std::max(rep.kcl_residual_magnetic, std::abs(f[mag_index_[n]]));
        }
    }
    return next;
}

TimeSeries Solver::run(const SystemState& initial, double duration,
                       const std::vector<Probe>& probes, const StepObserver& observer) const {
    if (!(duration >= 0.0)) {
        throw UsageError("run: duration must be >= 0");
    }
    std::vector<std::string> names;
    std::vector<std::string> units;
    for (const Probe& p : probes) {
        names.push_back(p.name);
        units.push_back(p.unit);
    }
    TimeSeries series(names, units);
    std::vector<double> sample(probes.size());
    auto record = [&](const SystemState& s) {
        for (std::size_t i = 0; i < probes.size(); ++i) {
            sample[i] = probes[i].read(network_, s);
        }
        series.append(s.time, sample);
    };
    SystemState state = initial;
    record(state);
    const auto steps = static_cast<long long>(std::llround(duration / config_.dt));
    StepReport report;
    for (long long i = 0; i < steps; ++i) {
        SystemState next = step(state, &report);
        record(next);
        if (observer) {
            observer(state, next, report);
        }
        state = std::move(next);
    }
    return series;
}

namespace {

bool is_source(const ElectricKind& kind) {
    return std::holds_alternative<AcVoltageSource>(kind) ||
           std::holds_alternative<DcVoltageSource>(kind) ||
           std::holds_alternative<CurrentSource>(kind);
}

bool is_resistive(const ElectricKind& kind) {
    return std::holds_alternative<Resistor>(kind) || std::holds_alternative<Switch>(kind) ||
           std::holds_alternative<Diode>(kind);
}

}  // namespace

double Solver::source_power(const SystemState& s) const {
    double p = 0.0;
    for (std::size_t e = 0; e < network_.electric().size(); ++e) {
        if (is_source(network_.electric()[e].kind)) {
            p -= s.branch_voltage[e] * s.branch_current[e];
        }
    }
    return p;
}

double Solver::dissipated_power(const SystemState& s) const {
    double p = 0.0;
    for (std::size_t e = 0; e < network_.electric().size(); ++e) {
        if (is_resistive(network_.electric()[e].kind)) {
            p += s.branch_voltage[e] * s.branch_current[e];
        }
    }
    for (std::size_t h = 0; h < network_.hysteresis().size(); ++h) {
        const double w = s.hysteresis_flow[h];
        p += network_.hysteresis()[h].r_mag * w * w;
    }
    return p;
}

PowerBalance Solver::power_balance(const SystemState& prev, const SystemState& next,
                                   bool backward_euler) const {
    // Branch powers use the step-averaged voltage and current of the rule
    // that produced the step: midpoint values for the trapezoidal rule and
    // end-of-step values for backward Euler.
    const double w0 = backward_euler ? 0.0 : 0.5;
    const double w1 = 1.0 - w0;
    auto avg = [&](double a, double b) { return w0 * a + w1 * b; };
    PowerBalance pb;
    for (std::size_t e = 0; e < network_.electric().size(); ++e) {
        const auto& kind = network_.electric()[e].kind;
        const double v = avg(prev.branch_voltage[e], next.branch_voltage[e]);
        const double i = avg(prev.branch_current[e], next.branch_current[e]);
        if (is_source(kind)) {
            pb.source -= v * i;
        } else if (is_resistive(kind)) {
            pb.dissipated += v * i;
        }
    }
    for (std::size_t h = 0; h < network_.hysteresis().size(); ++h) {
        const double w = avg(prev.hysteresis_flow[h], next.hysteresis_flow[h]);
        pb.dissipated += network_.hysteresis()[h].r_mag * w * w;
    }
    double stored = 0.0;
    for (std::size_t e = 0; e < network_.electric().size(); ++e) {
        const auto& kind = network_.electric()[e].kind;
        if (const auto* l = std::get_if<Inductor>(&kind)) {
            const double i0 = prev.branch_current[e];
            const double i1 = next.branch_current[e];
            stored += 0.5 * l->henries * (i1 * i1 - i0 * i0);
        } else if (const auto* c = std::get_if<Capacitor>(&kind)) {
            const double v0 = prev.branch_voltage[e];
            const double v1 = next.branch_voltage[e];
            stored += 0.5 * c->farads * (v1 * v1 - v0 * v0);
        }
    }
    for (std::size_t p = 0; p < network_.permeances().size(); ++p) {
        stored += stored_energy_change(network_.permeances()[p], prev.flux[p], next.flux[p]);
    }
    pb.stored_rate = stored / (next.time - prev.time);
    if (backward_euler) {
        // Backward Euler stores less than the port power it absorbs; the
        // difference is the rule's own damping.
        double absorbed = 0.0;
        for (std::size_t e = 0; e < network_.electric().size(); ++e) {
            const auto& kind = network_.electric()[e].kind;
            if (std::holds_alternative<Inductor>(kind) || std::holds_alternative<Capacitor>(kind)) {
                absorbed += next.branch_voltage[e] * next.branch_current[e];
            }
        }
        for (std::size_t p = 0; p < network_.permeances().size(); ++p) {
            const PermeanceElement& el = network_.permeances()[p];
            const double mmf = next.mag_potential[el.node_a] - next.mag_potential[el.node_b];
            absorbed += mmf * next.flux_rate[p];
        }
        pb.numerical_damping = absorbed - pb.stored_rate;
    }
    pb.residual = pb.source - pb.dissipated - pb.stored_rate - pb.numerical_damping;
    return pb;
}

SystemState step(const HybridNetwork& network, const SystemState& state,
                 const SolverConfig& config) {
    return Solver(network, config).step(state);
}

TimeSeries run(const HybridNetwork& network, const SystemState& initial,
               const SolverConfig& config, double duration, const std::vector<Probe>& probes) {
    return Solver(network, config).run(initial, duration, probes);
}

}  // namespace gcsim
