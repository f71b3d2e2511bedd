#pragma once

#include "rotopt/mesh.hpp"

namespace rotopt {

/// Harmonic multiplier space on the air-gap circle. Only harmonics compatible
/// with the anti-periodic pole symmetry survive: k = N_pp (2m - 1), i.e. odd
/// electrical orders. Basis index 2m holds cos(k_m phi), 2m+1 holds sin(k_m phi).
struct MortarSpace {
    int K = 8;  // scalar basis count, even
    double r_gamma = 0.0;
    std::vector<int> freq;

    MortarSpace() = default;
    MortarSpace(int K_, const MachineSpec& spec) : K(K_), r_gamma(spec.mortar_radius()) {
        if (K < 2 || K % 2 != 0) throw InvalidInput("mortar: K must be a positive even count");
        for (int m = 0; m < K / 2; ++m) freq.push_back(spec.pole_pairs * (2 * m + 1));
    }

    double basis(int q, double phi) const {
        const int k = freq[q / 2];
        return (q % 2 == 0) ? std::cos(k * phi) : std::sin(k * phi);
    }

    /// Rotation by alpha acts on coefficients as a block-diagonal phase map:
    /// q(phi + alpha) expanded back in the basis.
    Eigen::MatrixXd phase(double alpha) const {
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(K, K);
        for (int m = 0; m < K / 2; ++m) {
            const double c = std::cos(freq[m] * alpha), s = std::sin(freq[m] * alpha);
            G(2 * m, 2 * m) = c;
            G(2 * m, 2 * m + 1) = -s;
            G(2 * m + 1, 2 * m) = s;
            G(2 * m + 1, 2 * m + 1) = c;
        }
        return G;
    }
};

/// <q, v>_Gamma pairing matrix over the given circle edges: row q, column node,
/// entries int q(phi(x)) hat_i(x) ds along the polygonal trace.
inline SpMat mortar_pairing(const MortarSpace& mortar, const Mesh& mesh,
                            const std::vector<std::array<int, 2>>& circle_edges, int n_cols) {
    static const double gp[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
    static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};
    std::vector<Triplet> trip;
    for (const auto& ed : circle_edges) {
        const Vec2 a = mesh.nodes[ed[0]], b = mesh.nodes[ed[1]];
        const double len = (b - a).norm();
        for (int g = 0; g < 5; ++g) {
            const double t = 0.5 * (gp[g] + 1.0);
            const Vec2 x = a + t * (b - a);
            const double phi = std::atan2(x.y(), x.x());
            const double w = 0.5 * gw[g] * len;
            for (int q = 0; q < mortar.K; ++q) {
                const double val = mortar.basis(q, phi);
                trip.emplace_back(q, ed[0], w * val * (1.0 - t));
                trip.emplace_back(q, ed[1], w * val * t);
            }
        }
    }
    SpMat C(mortar.K, n_cols);
    C.setFromTriplets(trip.begin(), trip.end());
    return C;
}

/// <q, du/ds>_Gamma matrix over the rotor-side circle edges; du/ds is the
/// tangential (arc-length) derivative of the P1 trace, i.e. curl u . n_Gamma.
inline SpMat mortar_flux_pairing(const MortarSpace& mortar, const Mesh& mesh,
                                 const std::vector<std::array<int, 2>>& circle_edges, int n_cols) {
    static const double gp[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
    static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};
    std::vector<Triplet> trip;
    for (const auto& ed : circle_edges) {
        const Vec2 a = mesh.nodes[ed[0]], b = mesh.nodes[ed[1]];
        const double len = (b - a).norm();
        for (int q = 0; q < mortar.K; ++q) {
            double integral = 0.0;  // int q ds over the edge
            for (int g = 0; g < 5; ++g) {
                const double t = 0.5 * (gp[g] + 1.0);
                const Vec2 x = a + t * (b - a);
                integral += 0.5 * gw[g] * len * mortar.basis(q, std::atan2(x.y(), x.x()));
            }
            trip.emplace_back(q, ed[1], integral / len);
            trip.emplace_back(q, ed[0], -integral / len);
        }
    }
    SpMat W(mortar.K, n_cols);
    W.setFromTriplets(trip.begin(), trip.end());
    return W;
}

}  // namespace rotopt
