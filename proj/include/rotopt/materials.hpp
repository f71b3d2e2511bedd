#pragma once

#include "rotopt/geometry.hpp"
#include "rotopt/linalg.hpp"

#include <json.hpp>

namespace rotopt {

/// Magnetic material laws h_f, h_a, h_m and the magnet conductivity.
/// h_f(b) = [nu0 + (nu_f - nu0) K_f / (K_f^N + |b|^N)^{1/N}] b
/// h_a(b) = nu0 b,  h_m(b) = nu_m (b - B_R e_phi).
struct BHLawSet {
    double nu0 = 1e7 / (4.0 * kPi);
    double nu_f = 200.0;
    double K_f = 2.2;
    int N_f = 12;
    double nu_m = (1e7 / (4.0 * kPi)) / 1.086;
    double B_R = 1.216;
    double phi1 = 30.0 * kPi / 180.0;
    double phi2 = 15.0 * kPi / 180.0;
    double sigma_m = 6.7e5;

    double saturation(double t) const {  // K_f / (K_f^N + t^N)^{1/N}
        return K_f * std::pow(std::pow(K_f, N_f) + std::pow(t, N_f), -1.0 / N_f);
    }
    double saturation_deriv(double t) const {
        return -K_f * std::pow(t, N_f - 1) *
               std::pow(std::pow(K_f, N_f) + std::pow(t, N_f), -(1.0 + 1.0 / N_f));
    }

    Vec2 h_iron(const Vec2& b) const {
        return (nu0 + (nu_f - nu0) * saturation(b.norm())) * b;
    }
    Mat2 dh_iron(const Vec2& b) const {
        const double t = b.norm();
        if (t < 1e-12) return nu_f * Mat2::Identity();
        return (nu0 + (nu_f - nu0) * saturation(t)) * Mat2::Identity() +
               (nu_f - nu0) * saturation_deriv(t) / t * b * b.transpose();
    }

    double magnet_angle(Material m) const { return m == Material::Magnet1 ? phi1 : phi2; }
    bool is_linear(Material m) const { return m != Material::Iron; }
    double nu_linear(Material m) const { return m == Material::Air ? nu0 : nu_m; }
    /// Coercivity term of the linear laws, h(b) = nu b - H_c: H_c = nu_m B_R e_phi for magnets.
    Vec2 coercivity(Material m) const {
        if (m == Material::Magnet1 || m == Material::Magnet2)
            return nu_m * B_R * unit_vector(magnet_angle(m));
        return Vec2::Zero();
    }
    double sigma(Material m) const {
        return (m == Material::Magnet1 || m == Material::Magnet2) ? sigma_m : 0.0;
    }

    Vec2 h(Material m, const Vec2& b) const {
        if (m == Material::Iron) return h_iron(b);
        return nu_linear(m) * b - coercivity(m);
    }
    Mat2 dh(Material m, const Vec2& b) const {
        if (m == Material::Iron) return dh_iron(b);
        return nu_linear(m) * Mat2::Identity();
    }

    /// Magnet law with an explicit direction (used for the reference magnet m0 in sampling).
    Vec2 h_magnet(const Vec2& b, double phi) const { return nu_m * (b - B_R * unit_vector(phi)); }
};

/// Three-phase source current density on the coil bands.
struct SourceParams {
    double j_hat = 2.37e7;              // A/m^2
    double phi0 = 6.0 * kPi / 180.0;    // load angle
    int pole_pairs = 4;

    /// Instantaneous phase currents (i_A, i_B, i_C); they sum to zero.
    Eigen::Vector3d phase_currents(double alpha) const {
        const double x = pole_pairs * alpha + phi0;
        return {j_hat * std::sin(x), j_hat * std::sin(x + 2.0 * kPi / 3.0),
                j_hat * std::sin(x + 4.0 * kPi / 3.0)};
    }
    /// Signed current density of a coil region (winding sense: A+, B-, C+).
    double density(Region coil, double alpha) const {
        const auto i = phase_currents(alpha);
        switch (coil) {
            case Region::CoilA: return i[0];
            case Region::CoilB: return -i[1];
            case Region::CoilC: return i[2];
            default: return 0.0;
        }
    }
};

/// Stationary heat problem data. Temperatures are in degrees Celsius
/// throughout, matching the homogeneous Robin data theta_0 = 40 C.
struct ThermalParams {
    double lambda_f = 16.0, lambda_m = 9.0, lambda_a = 0.05;  // W/(m K)
    double beta_sh = 0.235, beta_ag = 260.0;                  // W/(m^2 K)
    double theta0 = 40.0;                                     // C
    double T_star = 90.0;                                     // C
    double weight = 1e6;

    double lambda(Material m) const {
        switch (m) {
            case Material::Iron: return lambda_f;
            case Material::Air: return lambda_a;
            default: return lambda_m;
        }
    }
    /// Temperature-constraint mask c: 1 on magnets, 0 elsewhere.
    double mask(Material m) const {
        return (m == Material::Magnet1 || m == Material::Magnet2) ? 1.0 : 0.0;
    }
};

/// Quadratic penalty Theta_S(s) = (max{1, s/S} - 1)^2 and its derivative.
inline double theta_penalty(double s, double S) {
    const double t = std::max(0.0, (s - S) / S);
    return t * t;
}
inline double theta_penalty_deriv(double s, double S) {
    return 2.0 / S * std::max(0.0, (s - S) / S);
}

/// Plane-stress elasticity data with ersatz material for air and magnets.
struct ElasticParams {
    double E_f = 2e11;          // Pa
    double ersatz_contrast = 1e-3;
    double rho_f = 7650.0, rho_m = 8400.0, rho_a = 0.0;  // kg/m^3
    double omega = 16000.0 * 2.0 * kPi / 60.0;           // rad/s
    double S_star = 5e8;        // Pa
    int p = 16;
    double weight = 3e7;
    double exclusion_margin = 3e-3;  // distance to Gamma_SH excluded from the constraint

    double E_a() const { return ersatz_contrast * E_f; }
    double youngs(Material m) const { return m == Material::Iron ? E_f : E_a(); }
    double density(Material m) const {
        switch (m) {
            case Material::Iron: return rho_f;
            case Material::Air: return rho_a;
            default: return rho_m;
        }
    }
    /// Stress-constraint mask c: 1 on iron, 0 elsewhere.
    double mask(Material m) const { return m == Material::Iron ? 1.0 : 0.0; }
    double M_star() const { return (S_star / E_f) * (S_star / E_f); }
};

/// p-norm regularized max penalty Phi_S(s) = (1 + (s/S)^p)^{1/p} - 1,
/// evaluated in scaled form for s >> S to avoid overflow.
inline double phi_penalty(double s, double S, int p) {
    const double x = s / S;
    if (x <= 1.0) return std::pow(1.0 + std::pow(x, p), 1.0 / p) - 1.0;
    return x * std::pow(1.0 + std::pow(1.0 / x, p), 1.0 / p) - 1.0;
}
inline double phi_penalty_deriv(double s, double S, int p) {
    const double x = s / S;
    if (x <= 0.0) return 0.0;
    // Phi'(s) = s^{p-1}/S^p (1 + (s/S)^p)^{(1-p)/p}, scaled form for x > 1.
    if (x <= 1.0) return std::pow(x, p - 1) / S * std::pow(1.0 + std::pow(x, p), (1.0 - p) / double(p));
    return 1.0 / S * std::pow(1.0 + std::pow(1.0 / x, p), (1.0 - p) / double(p));
}

}  // namespace rotopt
