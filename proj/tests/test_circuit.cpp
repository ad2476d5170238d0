#include <catch_amalgamated.hpp>

#include "gcsim/errors.hpp"
#include "gcsim/inductance.hpp"
#include "gcsim/scenario.hpp"

#include <algorithm>
#include <cmath>

using namespace gcsim;
using Catch::Matchers::WithinRel;

namespace {

bool has_issue(const std::vector<ValidationIssue>& issues, ValidationIssue::Kind kind) {
    return std::any_of(issues.begin(), issues.end(),
                       [&](const ValidationIssue& i) { return i.kind == kind; });
}

double reluctance(double mu_r, double area, double length) {
    return 1.0 / linear_permeance(mu_r, area, length);
}

}  // namespace

TEST_CASE("element parameters are checked on insertion", "[circuit]") {
    HybridNetwork net;
    const auto a = net.add_electric_node("a");
    const auto b = net.add_electric_node("b");
    CHECK_THROWS_AS(net.add(ElectricElement{"r", a, b, Resistor{0.0}}), ConstructionError);
    CHECK_THROWS_AS(net.add(ElectricElement{"l", a, b, Inductor{-1.0}}), ConstructionError);
    CHECK_THROWS_AS(net.add(ElectricElement{"c", a, b, Capacitor{0.0}}), ConstructionError);
    CHECK_THROWS_AS(net.add(ElectricElement{"s", a, b, Switch{1.0, 1.0}}), ConstructionError);
    CHECK_THROWS_AS(net.add(ElectricElement{"d", a, b, Diode{0.0}}), ConstructionError);
    CHECK_THROWS_AS(net.add(ElectricElement{"v", a, b, AcVoltageSource{1.0, 0.0}}),
                    ConstructionError);
    CHECK_THROWS_AS(net.add(std::shared_ptr<const Controller>{}), ConstructionError);
    CHECK(net.add(ElectricElement{"r", a, b, Resistor{2.0}}) == 0);
    CHECK(net.electric()[0].index == 0);
}

TEST_CASE("element current follows the conduction state", "[circuit]") {
    HybridNetwork net;
    const auto a = net.add_electric_node("a");
    const auto b = net.add_electric_node("b");
    net.add(ElectricElement{"s", a, b, Switch{0.01, 1e-6}});
    net.add(ElectricElement{"d", a, b, Diode{0.02, 1e-6, 0.7}});
    net.add(ElectricElement{"r", a, b, Resistor{4.0}});
    auto s = net.zero_state();
    CHECK_THAT(element_current(net.electric()[0], 2.0, s), WithinRel(2e-6, 1e-12));
    CHECK_THAT(element_current(net.electric()[1], 2.0, s), WithinRel(2e-6, 1e-12));
    s.conducting[0] = 1;
    s.conducting[1] = 1;
    CHECK_THAT(element_current(net.electric()[0], 2.0, s), WithinRel(200.0, 1e-12));
    CHECK_THAT(element_current(net.electric()[1], 2.0, s), WithinRel(65.0, 1e-12));
    CHECK_THAT(element_current(net.electric()[2], 2.0, s), WithinRel(0.5, 1e-12));
}

TEST_CASE("ac source value", "[circuit]") {
    const AcVoltageSource v{10.0, 50.0, 0.5};
    CHECK_THAT(v.value(0.0), WithinRel(std::sqrt(2.0) * 10.0 * std::sin(0.5), 1e-12));
    CHECK_THAT(v.value(0.005), WithinRel(std::sqrt(2.0) * 10.0 * std::cos(0.5), 1e-12));
}

TEST_CASE("CVSR networks are structurally valid", "[circuit]") {
    const CvsrParams p;
    CHECK(validate(build_cvsr_network(p, SourceKind::ideal, ReferenceProfile(5.0))).empty());
    CHECK(validate(build_cvsr_network(p, SourceKind::converter, {}, default_converter(5.0)))
              .empty());
    CvsrParams lin = p;
    lin.linear_core = true;
    const auto net = build_cvsr_network(lin, SourceKind::ideal);
    CHECK(validate(net).empty());
    CHECK(net.hysteresis().empty());
    CHECK_THROWS_AS(net.find_permeance("nope"), UsageError);
    CHECK_THROWS_AS(net.electric_node("nope"), UsageError);
}

TEST_CASE("validation reports structural problems", "[circuit]") {
    using Kind = ValidationIssue::Kind;
    {
        HybridNetwork net;
        const auto a = net.add_electric_node("a");
        const auto b = net.add_electric_node("b");
        net.add(ElectricElement{"r", a, b, Resistor{1.0}});
        CHECK(has_issue(validate(net), Kind::no_ground));
    }
    {
        HybridNetwork net;
        const auto g = net.add_electric_node("0");
        const auto a = net.add_electric_node("a");
        const auto b = net.add_electric_node("b");
        const auto c = net.add_electric_node("c");
        net.set_electric_ground(g);
        net.add(ElectricElement{"r1", g, a, Resistor{1.0}});
        net.add(ElectricElement{"r2", b, c, Resistor{1.0}});
        net.add(ElectricElement{"r3", b, c, Resistor{1.0}});
        const auto issues = validate(net);
        CHECK(has_issue(issues, Kind::dangling_node));
        CHECK(has_issue(issues, Kind::disconnected));
    }
    {
        HybridNetwork net;
        const auto g = net.add_electric_node("0");
        net.set_electric_ground(g);
        net.add(ElectricElement{"r", g, 7, Resistor{1.0}});
        CHECK(has_issue(validate(net), Kind::bad_reference));
    }
    {
        HybridNetwork net;
        const auto g = net.add_electric_node("0");
        const auto a = net.add_electric_node("a");
        net.set_electric_ground(g);
        net.add(ElectricElement{"v", a, g, DcVoltageSource{1.0}});
        net.add(ElectricElement{"r", a, g, Resistor{1.0}});
        const auto mg = net.add_magnetic_node("m0");
        const auto m1 = net.add_magnetic_node("m1");
        net.set_magnetic_ground(mg);
        net.add(PermeanceElement::linear("p1", mg, m1, 1000.0, 1e-3, 0.1));
        net.add(PermeanceElement::linear("p2", mg, m1, 1000.0, 1e-3, 0.1));
        CHECK(has_issue(validate(net), Kind::missing_coupling));
    }
}

TEST_CASE("linear CVSR inductances match the reluctance network", "[circuit][inductance]") {
    CvsrParams p;
    p.linear_core = true;
    p.fringing_factor = 1.0;
    const auto net = build_cvsr_network(p, SourceKind::ideal);
    const auto& g = p.geometry;
    const double mu = p.material.mu_r_linear;
    const double r_mid = reluctance(mu, g.area, g.l_mid);
    const double r_out = reluctance(mu, g.area, g.l_out);
    const double r_gap = reluctance(1.0, g.area, g.h_gap);

    // ac winding: middle leg and gap in series with the two outer legs in parallel
    const double l_ac = p.n_ac * p.n_ac / (r_mid + r_gap + 0.5 * r_out);
    CHECK_THAT(equivalent_inductance(net, cvsr::winding_ac, net.zero_state()), WithinRel(l_ac, 1e-9));

    // one dc coil: its own leg in series with the other leg parallel to the middle branch
    const double r_mg = r_mid + r_gap;
    const double l_dc = p.n_dc * p.n_dc / (r_out + r_out * r_mg / (r_out + r_mg));
    CHECK_THAT(equivalent_inductance(net, cvsr::winding_right, net.zero_state()),
               WithinRel(l_dc, 1e-9));
    CHECK_THAT(equivalent_inductance(net, cvsr::winding_left, net.zero_state()),
               WithinRel(l_dc, 1e-9));
}

TEST_CASE("saturated legs lower the dc-coil inductance", "[circuit][inductance]") {
    const CvsrParams p;
    const auto net = build_cvsr_network(p, SourceKind::ideal);
    auto op = net.zero_state();
    const double l0 = equivalent_inductance(net, cvsr::winding_right, op);
    const double phi_sat = 1.55 * p.geometry.area;
    op.flux[net.find_permeance(cvsr::leg_left)] = -phi_sat;
    op.flux[net.find_permeance(cvsr::leg_right)] = phi_sat;
    const double l_sat = equivalent_inductance(net, cvsr::winding_right, op);
    CHECK(l_sat < 0.05 * l0);
    CHECK(l_sat > 0.0);

    SystemState wrong;
    CHECK_THROWS_AS(equivalent_inductance(net, cvsr::winding_ac, wrong), UsageError);
    CHECK_THROWS_AS(equivalent_inductance(net, "w_missing", op), UsageError);
}
