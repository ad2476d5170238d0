#include "gcsim/circuit.hpp"

#include "gcsim/errors.hpp"

#include <cmath>
#include <numbers>
#include <queue>

namespace gcsim {

double AcVoltageSource::value(double t) const {
    return std::numbers::sqrt2 * rms * std::sin(2.0 * std::numbers::pi * hz * t + phase);
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void ElectricElement::validate() const {
    auto fail = [&](const std::string& why) {
        throw ConstructionError("element '" + name + "': " + why);
    };
    std::visit(overloaded{
                   [&](const AcVoltageSource& s) {
                       if (!(s.rms >= 0.0) || !(s.hz > 0.0)) fail("ac source needs rms >= 0, hz > 0");
                   },
                   [](const DcVoltageSource&) {},
                   [](const CurrentSource&) {},
                   [&](const Resistor& r) {
                       if (!(r.ohms > 0.0)) fail("resistance must be positive");
                   },
                   [&](const Inductor& l) {
                       if (!(l.henries > 0.0)) fail("inductance must be positive");
                   },
                   [&](const Capacitor& c) {
                       if (!(c.farads > 0.0)) fail("capacitance must be positive");
                   },
                   [&](const Switch& s) {
                       if (!(s.r_on > 0.0) || !(s.g_off >= 0.0) || !(s.g_off * s.r_on < 1e-3))
                           fail("switch needs r_on > 0 and 0 <= g_off << 1/r_on");
                   },
                   [&](const Diode& d) {
                       if (!(d.r_on > 0.0) || !(d.g_off >= 0.0) || !(d.g_off * d.r_on < 1e-3))
                           fail("diode needs r_on > 0 and 0 <= g_off << 1/r_on");
                   },
               },
               kind);
}

double element_current(const ElectricElement& element, double v, const SystemState& state) {
    const std::size_t i = element.index;
    return std::visit(
        overloaded{
            [&](const Resistor& r) { return v / r.ohms; },
            [&](const Switch& s) { return state.conducting.at(i) ? v / s.r_on : v * s.g_off; },
            [&](const Diode& d) {
                return state.conducting.at(i) ? (v - d.v_threshold) / d.r_on : v * d.g_off;
            },
            [&](const CurrentSource& s) { return s.reference.value(state.time); },
            [&](const auto&) { return state.branch_current.at(i); },
        },
        element.kind);
}

std::size_t HybridNetwork::add_electric_node(const std::string& name) {
    electric_nodes_.push_back(name);
    return electric_nodes_.size() - 1;
}

std::size_t HybridNetwork::add_magnetic_node(const std::string& name) {
    magnetic_nodes_.push_back(name);
    return magnetic_nodes_.size() - 1;
}

std::size_t HybridNetwork::add(ElectricElement element) {
    element.validate();
    element.index = electric_.size();
    electric_.push_back(std::move(element));
    return electric_.size() - 1;
}

std::size_t HybridNetwork::add(PermeanceElement element) {
    element.validate();
    permeances_.push_back(std::move(element));
    return permeances_.size() - 1;
}

std::size_t HybridNetwork::add(HysteresisElement element) {
    element.validate();
    hysteresis_.push_back(std::move(element));
    return hysteresis_.size() - 1;
}

std::size_t HybridNetwork::add(WindingGyrator element) {
    element.validate();
    windings_.push_back(std::move(element));
    return windings_.size() - 1;
}

std::size_t HybridNetwork::add(std::shared_ptr<const Controller> controller) {
    if (!controller) {
        throw ConstructionError("null controller");
    }
    const std::size_t offset = controller_state_size_;
    controller_state_size_ += controller->state_size();
    controllers_.push_back({std::move(controller), offset});
    return offset;
}

namespace {

template <typename Vec>
std::size_t find_named(const Vec& v, const std::string& name, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].name == name) {
            return i;
        }
    }
    throw UsageError(std::string("no ") + what + " named '" + name + "'");
}

std::size_t find_node(const std::vector<std::string>& nodes, const std::string& name) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] == name) {
            return i;
        }
    }
    throw UsageError("no node named '" + name + "'");
}

}  // namespace

std::size_t HybridNetwork::find_electric(const std::string& name) const {
    return find_named(electric_, name, "electric element");
}
std::size_t HybridNetwork::find_permeance(const std::string& name) const {
    return find_named(permeances_, name, "permeance");
}
std::size_t HybridNetwork::find_winding(const std::string& name) const {
    return find_named(windings_, name, "winding");
}
std::size_t HybridNetwork::find_hysteresis(const std::string& name) const {
    return find_named(hysteresis_, name, "hysteresis element");
}
std::size_t HybridNetwork::electric_node(const std::string& name) const {
    return find_node(electric_nodes_, name);
}
std::size_t HybridNetwork::magnetic_node(const std::string& name) const {
    return find_node(magnetic_nodes_, name);
}

SystemState HybridNetwork::zero_state() const {
    SystemState s;
    s.elec_potential.assign(electric_nodes_.size(), 0.0);
    s.mag_potential.assign(magnetic_nodes_.size(), 0.0);
    s.branch_voltage.assign(electric_.size(), 0.0);
    s.branch_current.assign(electric_.size(), 0.0);
    s.conducting.assign(electric_.size(), 0);
    s.flux.assign(permeances_.size(), 0.0);
    s.flux_rate.assign(permeances_.size(), 0.0);
    s.hysteresis_flow.assign(hysteresis_.size(), 0.0);
    s.gyrator_current.assign(windings_.size(), 0.0);
    s.gyrator_flow.assign(windings_.size(), 0.0);
    s.controller.assign(controller_state_size_, 0.0);
    return s;
}

namespace {

struct DomainGraph {
    std::vector<std::vector<std::size_t>> adjacency;
    std::vector<int> terminals;
    bool bad = false;

    explicit DomainGraph(std::size_t n) : adjacency(n), terminals(n, 0) {}

    void edge(std::size_t a, std::size_t b) {
        if (a >= adjacency.size() || b >= adjacency.size()) {
            bad = true;
            return;
        }
        adjacency[a].push_back(b);
        adjacency[b].push_back(a);
        ++terminals[a];
        ++terminals[b];
    }
};

void check_domain(const DomainGraph& g, const std::vector<std::string>& names,
                  std::optional<std::size_t> ground, Domain domain, const char* label,
                  std::vector<ValidationIssue>& issues) {
    using Kind = ValidationIssue::Kind;
    if (g.bad) {
        issues.push_back({Kind::bad_reference, domain,
                          std::string(label) + " element references a missing node"});
    }
    if (!ground || *ground >= names.size()) {
        issues.push_back({Kind::no_ground, domain, std::string(label) + " domain has no ground"});
        return;
    }
    std::vector<char> dangling(names.size(), 0);
    for (std::size_t n = 0; n < names.size(); ++n) {
        if (n != *ground && g.terminals[n] < 2) {
            dangling[n] = 1;
            issues.push_back({Kind::dangling_node, domain,
                              std::string(label) + " node '" + names[n] + "' is dangling"});
        }
    }
    std::vector<char> seen(names.size(), 0);
    std::queue<std::size_t> q;
    q.push(*ground);
    seen[*ground] = 1;
    while (!q.empty()) {
        const std::size_t n = q.front();
        q.pop();
        for (std::size_t m : g.adjacency[n]) {
            if (!seen[m]) {
                seen[m] = 1;
                q.push(m);
            }
        }
    }
    for (std::size_t n = 0; n < names.size(); ++n) {
        if (!seen[n] && !dangling[n]) {
            issues.push_back({Kind::disconnected, domain,
                              std::string(label) + " node '" + names[n] +
                                  "' is not connected to ground"});
        }
    }
}

}  // namespace

std::vector<ValidationIssue> validate(const HybridNetwork& network) {
    std::vector<ValidationIssue> issues;
    DomainGraph elec(network.electric_nodes().size());
    DomainGraph mag(network.magnetic_nodes().size());
    for (const auto& e : network.electric()) {
        elec.edge(e.node_a, e.node_b);
    }
    for (const auto& p : network.permeances()) {
        mag.edge(p.node_a, p.node_b);
    }
    for (const auto& h : network.hysteresis()) {
        mag.edge(h.node_a, h.node_b);
    }
    for (const auto& w : network.windings()) {
        elec.edge(w.elec_p, w.elec_n);
        mag.edge(w.mag_a, w.mag_b);
    }
    const bool has_elec = !network.electric_nodes().empty() || !network.electric().empty();
    const bool has_mag = !network.magnetic_nodes().empty() || !network.permeances().empty();
    if (has_elec) {
        check_domain(elec, network.electric_nodes(), network.electric_ground(), Domain::electric,
                     "electric", issues);
    }
    if (has_mag) {
        check_domain(mag, network.magnetic_nodes(), network.magnetic_ground(), Domain::magnetic,
                     "magnetic", issues);
    }
    if (has_elec && has_mag && network.windings().empty()) {
        issues.push_back({ValidationIssue::Kind::missing_coupling, Domain::magnetic,
                          "electric and magnetic domains are not coupled by any winding"});
    }
    return issues;
}

}  // namespace gcsim
