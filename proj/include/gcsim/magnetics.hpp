#pragma once

// Magnetic-domain elements for gyrator-capacitor networks.
//
// In the gyrator-capacitor picture the magnetomotive force plays the role of
// a voltage and the flux rate dPhi/dt the role of a current, so flux is the
// "charge" stored on a permeance "capacitor". Nonlinear core paths become
// nonlinear capacitors whose charge-voltage law is derived from a B-H curve.

#include <cstddef>
#include <numbers>
#include <optional>
#include <string>

namespace gcsim {

inline constexpr double mu0 = 4.0e-7 * std::numbers::pi;

struct CoreGeometry {
    double l_mid = 0.4572;   ///< mean length of the middle leg (m)
    double l_out = 0.8636;   ///< mean length of each outer leg (m)
    double h_gap = 0.00178;  ///< air-gap height (m)
    double area = 0.0103;    ///< core cross-section (m^2)

    void validate() const;
    bool operator==(const CoreGeometry&) const = default;
};

/// Smooth two-slope anhysteretic saturation curve.
///
/// B(H) = mu0*mu_sat*H + mu0*(mu_lin - mu_sat)*clip(H). The incremental
/// permeability blend
///   d(clip)/dH = (erfc((H - H_k)/w) - erfc((H + H_k)/w)) / (2*erf(H_k/w))
/// falls from 1 to 0 around the knee field H_k over a width
/// w = H_k/knee_sharpness, with Gaussian tails on both sides. B(H) is odd,
/// strictly increasing and infinitely differentiable, and H_k is placed so
/// that B(H_k) = b_sat. H(B) is obtained by inverting B(H).
struct BHMaterial {
    double mu_r_linear = 5000.0;
    double b_sat = 1.34;  ///< T
    double mu_r_sat = 45.0;
    double knee_sharpness = 2.75;

    void validate() const;
    /// Field at the centre of the knee (A/m).
    [[nodiscard]] double knee_field() const;
    /// Width of the knee transition (A/m).
    [[nodiscard]] double knee_width() const { return knee_field() / knee_sharpness; }
    bool operator==(const BHMaterial&) const = default;
};

/// Flux density for a given field intensity (T).
[[nodiscard]] double b_of_h(const BHMaterial& material, double h);
/// dB/dH at field intensity h (H/m).
[[nodiscard]] double db_dh(const BHMaterial& material, double h);
/// Field intensity for a given flux density (A/m); inverse of b_of_h.
[[nodiscard]] double h_of_b(const BHMaterial& material, double b);
/// Integral of B dH from h0 to h1 (J/m^3).
[[nodiscard]] double coenergy_density(const BHMaterial& material, double h0, double h1);

/// Permeance mu0*mu_r*area/length (Wb per A-turn).
[[nodiscard]] double linear_permeance(double mu_r, double area, double length);
/// Air-gap permeance including a multiplicative fringing factor (>= 1).
[[nodiscard]] double gap_permeance(const CoreGeometry& geometry, double fringing_factor);

enum class PermeanceKind { linear, nonlinear_core, air_gap };

/// A permeance capacitor in the magnetic network. Flux is its state.
struct PermeanceElement {
    std::string name;
    PermeanceKind kind = PermeanceKind::linear;
    std::size_t node_a = 0;  ///< flux flows from a to b through the element
    std::size_t node_b = 0;
    double length = 1.0;  ///< m
    double area = 1.0;    ///< m^2
    double mu_r = 1.0;    ///< linear kind only
    double fringing_factor = 1.0;  ///< air-gap kind only
    std::optional<BHMaterial> material;  ///< nonlinear kind only

    static PermeanceElement linear(std::string name, std::size_t a, std::size_t b, double mu_r,
                                   double area, double length);
    static PermeanceElement nonlinear(std::string name, std::size_t a, std::size_t b,
                                      const BHMaterial& material, double area, double length);
    static PermeanceElement air_gap(std::string name, std::size_t a, std::size_t b,
                                    double area, double gap, double fringing_factor);

    void validate() const;
    /// Constant permeance of the linear and air-gap kinds.
    [[nodiscard]] double permeance() const;
};

/// mmf across the element carrying flux phi. Odd and strictly increasing.
[[nodiscard]] double mmf_of_flux(const PermeanceElement& element, double phi);
/// Flux carried for a given mmf; explicit inverse of mmf_of_flux.
[[nodiscard]] double flux_of_mmf(const PermeanceElement& element, double mmf);
/// Local capacitance dPhi/dF at flux phi.
[[nodiscard]] double differential_permeance(const PermeanceElement& element, double phi);
/// Energy delivered to the element while its flux moves from phi0 to phi1 (J).
[[nodiscard]] double stored_energy_change(const PermeanceElement& element, double phi0,
                                          double phi1);

/// Magnetic resistor modelling core loss: mmf drop = r_mag * dPhi/dt.
struct HysteresisElement {
    std::string name;
    std::size_t node_a = 0;
    std::size_t node_b = 0;
    double r_mag = 0.0;  ///< A-turn per Wb/s

    void validate() const;
};

/// Winding as a lossless two-port: v = polarity*N*dPhi/dt, mmf = polarity*N*i.
///
/// Electric current enters at elec_p and leaves at elec_n. The mmf source
/// raises the magnetic potential of mag_a over mag_b, and the winding flux
/// leaves the port at mag_a.
struct WindingGyrator {
    std::string name;
    int turns = 1;
    std::size_t elec_p = 0;
    std::size_t elec_n = 0;
    std::size_t mag_a = 0;
    std::size_t mag_b = 0;
    int polarity = 1;

    void validate() const;
};

}  // namespace gcsim
