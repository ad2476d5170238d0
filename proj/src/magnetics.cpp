#include "gcsim/magnetics.hpp"

#include "gcsim/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <utility>

namespace gcsim {

namespace {

// Antiderivative of erfc(u)/2
double half_erfc_integral(double u) {
    return 0.5 * (u * std::erfc(u) - std::exp(-u * u) / std::sqrt(std::numbers::pi));
}

// clip(h) for h >= 0 with knee centre c and width w, unit slope at h = 0
double clip(double h, double c, double w) {
    return w *
           (half_erfc_integral((h - c) / w) - half_erfc_integral(-c / w) -
            half_erfc_integral((h + c) / w) + half_erfc_integral(c / w)) /
           std::erf(c / w);
}

// b_of_h for h >= 0
double b_of_h_positive(const BHMaterial& m, double h) {
    const double hk = m.knee_field();
    return mu0 * m.mu_r_sat * h +
           mu0 * (m.mu_r_linear - m.mu_r_sat) * clip(h, hk, hk / m.knee_sharpness);
}

// 5-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr std::array<double, 5> gl_x{0.0, -0.5384693101056831, 0.5384693101056831,
                                     -0.9061798459386640, 0.9061798459386640};
constexpr std::array<double, 5> gl_w{0.5688888888888889, 0.4786286704993665,
                                     0.4786286704993665, 0.2369268850561891,
                                     0.2369268850561891};

template <typename F>
double gauss5(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < gl_x.size(); ++i) {
        sum += gl_w[i] * f(mid + half * gl_x[i]);
    }
    return sum * half;
}

}  // namespace

void CoreGeometry::validate() const {
    if (!(l_mid > 0.0) || !(l_out > 0.0) || !(h_gap > 0.0) || !(area > 0.0)) {
        throw DomainError("core geometry: lengths and area must be strictly positive");
    }
    if (!(h_gap < l_mid)) {
        throw DomainError("core geometry: air gap must be shorter than the middle leg");
    }
}

void BHMaterial::validate() const {
    if (!(mu_r_sat >= 1.0) || !(mu_r_linear > mu_r_sat)) {
        throw DomainError("B-H material: require mu_r_linear > mu_r_sat >= 1");
    }
    if (!(b_sat > 0.0)) {
        throw DomainError("B-H material: b_sat must be positive");
    }
    if (!(knee_sharpness > 0.0)) {
        throw DomainError("B-H material: knee sharpness must be positive");
    }
}

double BHMaterial::knee_field() const {
    // clip scales with H_k, so B(H_k) is linear in H_k.
    const double c = clip(1.0, 1.0, 1.0 / knee_sharpness);
    return b_sat / (mu0 * (mu_r_sat + (mu_r_linear - mu_r_sat) * c));
}

double b_of_h(const BHMaterial& material, double h) {
    return h < 0.0 ? -b_of_h_positive(material, -h) : b_of_h_positive(material, h);
}

double db_dh(const BHMaterial& material, double h) {
    const double hk = material.knee_field();
    const double w = material.knee_width();
    const double ah = std::abs(h);
    const double blend =
        0.5 * (std::erfc((ah - hk) / w) - std::erfc((ah + hk) / w)) / std::erf(material.knee_sharpness);
    return mu0 * material.mu_r_sat + mu0 * (material.mu_r_linear - material.mu_r_sat) * blend;
}

double h_of_b(const BHMaterial& material, double b) {
    if (b == 0.0) {
        return 0.0;
    }
    if (b < 0.0) {
        return -h_of_b(material, -b);
    }
    const double hk = material.knee_field();
    // B(H) >= mu0*mu_sat*H brackets the root from above.
    double lo = 0.0;
    double hi = b / (mu0 * material.mu_r_sat);
    double h = b <= material.b_sat ? b / (mu0 * material.mu_r_linear)
                                   : hk + (b - material.b_sat) / (mu0 * material.mu_r_sat);
    h = std::clamp(h, lo, hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = b_of_h_positive(material, h) - b;
        if (f == 0.0) {
            return h;
        }
        if (f < 0.0) {
            lo = h;
        } else {
            hi = h;
        }
        double next = h - f / db_dh(material, h);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        const double step = std::abs(next - h);
        h = next;
        if (step <= 1e-15 * std::max(h, hk) || hi - lo <= 1e-15 * std::max(h, hk)) {
            return h;
        }
    }
    return h;
}

double coenergy_density(const BHMaterial& material, double h0, double h1) {
    if (h0 == h1) {
        return 0.0;
    }
    if (h1 < h0) {
        return -coenergy_density(material, h1, h0);
    }
    const double hk = material.knee_field();
    const double w = material.knee_width();
    const double span = 12.0 * w;
    // Knee regions need resolution on the scale of w; elsewhere B(H) is
    // linear up to Gaussian-small terms.
    std::array<double, 6> pts{};
    std::size_t n = 0;
    pts[n++] = h0;
    for (double cut : {-hk - span, -hk + span, hk - span, hk + span}) {
        if (cut > h0 && cut < h1) {
            pts[n++] = cut;
        }
    }
    pts[n++] = h1;
    std::sort(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(n));
    auto b = [&](double h) { return b_of_h(material, h); };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double a = pts[i];
        const double c = pts[i + 1];
        const double mid = 0.5 * (a + c);
        const bool in_knee = std::abs(std::abs(mid) - hk) < span;
        const int pieces = in_knee ? std::max(1, static_cast<int>(std::ceil(2.0 * (c - a) / w))) : 1;
        const double piece = (c - a) / pieces;
        for (int k = 0; k < pieces; ++k) {
            total += gauss5(b, a + k * piece, a + (k + 1) * piece);
        }
    }
    return total;
}

double linear_permeance(double mu_r, double area, double length) {
    if (!(area > 0.0) || !(length > 0.0)) {
        throw DomainError("linear_permeance: area and length must be positive");
    }
    if (!(mu_r >= 1.0)) {
        throw DomainError("linear_permeance: mu_r must be >= 1");
    }
    return mu0 * mu_r * area / length;
}

double gap_permeance(const CoreGeometry& geometry, double fringing_factor) {
    if (!(fringing_factor >= 1.0)) {
        throw DomainError("gap_permeance: fringing factor must be >= 1");
    }
    return fringing_factor * linear_permeance(1.0, geometry.area, geometry.h_gap);
}

PermeanceElement PermeanceElement::linear(std::string name, std::size_t a, std::size_t b,
                                          double mu_r, double area, double length) {
    PermeanceElement e;
    e.name = std::move(name);
    e.kind = PermeanceKind::linear;
    e.node_a = a;
    e.node_b = b;
    e.mu_r = mu_r;
    e.area = area;
    e.length = length;
    e.validate();
    return e;
}

PermeanceElement PermeanceElement::nonlinear(std::string name, std::size_t a, std::size_t b,
                                             const BHMaterial& material, double area,
                                             double length) {
    PermeanceElement e;
    e.name = std::move(name);
    e.kind = PermeanceKind::nonlinear_core;
    e.node_a = a;
    e.node_b = b;
    e.material = material;
    e.area = area;
    e.length = length;
    e.validate();
    return e;
}

PermeanceElement PermeanceElement::air_gap(std::string name, std::size_t a, std::size_t b,
                                           double area, double gap, double fringing_factor) {
    PermeanceElement e;
    e.name = std::move(name);
    e.kind = PermeanceKind::air_gap;
    e.node_a = a;
    e.node_b = b;
    e.area = area;
    e.length = gap;
    e.fringing_factor = fringing_factor;
    e.validate();
    return e;
}

void PermeanceElement::validate() const {
    if (!(area > 0.0) || !(length > 0.0)) {
        throw DomainError("permeance '" + name + "': area and length must be positive");
    }
    switch (kind) {
        case PermeanceKind::linear:
            if (!(mu_r >= 1.0)) {
                throw DomainError("permeance '" + name + "': mu_r must be >= 1");
            }
            break;
        case PermeanceKind::air_gap:
            if (!(fringing_factor >= 1.0)) {
                throw DomainError("permeance '" + name + "': fringing factor must be >= 1");
            }
            break;
        case PermeanceKind::nonlinear_core:
            if (!material) {
                throw DomainError("permeance '" + name + "': nonlinear kind needs a material");
            }
            material->validate();
            break;
    }
}

double PermeanceElement::permeance() const {
    switch (kind) {
        case PermeanceKind::linear:
            return linear_permeance(mu_r, area, length);
        case PermeanceKind::air_gap:
            return fringing_factor * linear_permeance(1.0, area, length);
        case PermeanceKind::nonlinear_core:
            break;
    }
    throw UsageError("permeance '" + name + "' is nonlinear; use differential_permeance");
}

double mmf_of_flux(const PermeanceElement& element, double phi) {
    if (element.kind != PermeanceKind::nonlinear_core || !element.material) {
        throw UsageError("mmf_of_flux: '" + element.name + "' is not a nonlinear core path");
    }
    return h_of_b(*element.material, phi / element.area) * element.length;
}

double flux_of_mmf(const PermeanceElement& element, double mmf) {
    if (element.kind != PermeanceKind::nonlinear_core) {
        return element.permeance() * mmf;
    }
    return b_of_h(*element.material, mmf / element.length) * element.area;
}

double differential_permeance(const PermeanceElement& element, double phi) {
    if (element.kind != PermeanceKind::nonlinear_core) {
        return element.permeance();
    }
    const double h = h_of_b(*element.material, phi / element.area);
    return db_dh(*element.material, h) * element.area / element.length;
}

double stored_energy_change(const PermeanceElement& element, double phi0, double phi1) {
    if (element.kind != PermeanceKind::nonlinear_core) {
        return (phi1 * phi1 - phi0 * phi0) / (2.0 * element.permeance());
    }
    const BHMaterial& m = *element.material;
    const double b0 = phi0 / element.area;
    const double b1 = phi1 / element.area;
    const double h0 = h_of_b(m, b0);
    const double h1 = h_of_b(m, b1);
    // integral of H dB = [H B] - integral of B dH
    const double density = (h1 * b1 - h0 * b0) - coenergy_density(m, h0, h1);
    return density * element.area * element.length;
}

void HysteresisElement::validate() const {
    if (!(r_mag >= 0.0)) {
        throw DomainError("hysteresis element '" + name + "': r_mag must be >= 0");
    }
}

void WindingGyrator::validate() const {
    if (turns <= 0) {
        throw DomainError("winding '" + name + "': turns must be positive");
    }
    if (polarity != 1 && polarity != -1) {
        throw DomainError("winding '" + name + "': polarity must be +1 or -1");
    }
}

}  // namespace gcsim
