#pragma once

#include "rotopt/levelset.hpp"
#include "rotopt/volume.hpp"

namespace rotopt {

/// Two-bar starting layout: a pair of annular-sector magnets symmetric about
/// the pole center, magnetized along phi_1 = 30 deg (outer-angle bar) and
/// phi_2 = 15 deg (inner-angle bar); iron elsewhere. The angular half width is
/// bisected so the magnet area matches the requested cap from below.
struct InitialDesignParams {
    double bar_inner_radius = 70e-3;
    double bar_outer_radius = 76.6e-3;
    double center_offset = 7.5 * kPi / 180.0;  // bar centers at pole/2 +/- offset
};

/// Default bar placement for a given geometry: bars end one millimeter below
/// the iron ring (thin bridge keeps the magnet flux from short-circuiting).
inline InitialDesignParams default_initial_params(const MachineSpec& spec) {
    InitialDesignParams p;
    p.bar_outer_radius = spec.ring_inner_radius() - 1e-3;
    p.bar_inner_radius = p.bar_outer_radius - 6.6e-3;
    return p;
}

namespace detail {

inline LevelSetField two_bar_field(const DesignSpace& space, const SectorBasis& basis,
                                   const InitialDesignParams& p, double pole_angle,
                                   double half_width) {
    LevelSetField psi(space.node_count(), basis.M - 1);
    const double c1 = 0.5 * pole_angle + p.center_offset;  // magnet 1 band (30 deg direction)
    const double c2 = 0.5 * pole_angle - p.center_offset;  // magnet 2 band (15 deg direction)
    for (int n = 0; n < space.node_count(); ++n) {
        const Vec2 x = space.mesh->nodes[space.sub.nodes[n]];
        const double r = x.norm(), phi = std::atan2(x.y(), x.x());
        Material mat = Material::Iron;
        if (r >= p.bar_inner_radius && r <= p.bar_outer_radius) {
            if (std::abs(phi - c1) <= half_width) mat = Material::Magnet1;
            if (std::abs(phi - c2) <= half_width) mat = Material::Magnet2;
        }
        psi.row(n) = basis.vertices[static_cast<int>(mat)].transpose();
    }
    return normalized(space, psi);
}

}  // namespace detail

/// Builds the initial level set; the returned design satisfies
/// cap * (1 - tol) <= V <= cap.
inline LevelSetField initial_two_bar_design(const DesignSpace& space, const SectorBasis& basis,
                                            const VolumeBudget& budget,
                                            const InitialDesignParams& params = {},
                                            double tol = 1e-3) {
    const double pole = space.mesh->spec.pole_angle();
    double lo = 0.0, hi = params.center_offset;  // bars may at most touch at the pole center
    auto vol_of = [&](double w) {
        const LevelSetField psi = detail::two_bar_field(space, basis, params, pole, w);
        return volume(cut_ratios(psi, space, basis), space, budget);
    };
    if (vol_of(hi) < budget.cap)
        throw InvalidInput("initial design: bars cannot reach the requested magnet volume");
    double w = hi;
    for (int it = 0; it < 60; ++it) {
        w = 0.5 * (lo + hi);
        const double v = vol_of(w);
        if (v > budget.cap)
            hi = w;
        else if (v < budget.cap * (1.0 - tol))
            lo = w;
        else
            return detail::two_bar_field(space, basis, params, pole, w);
    }
    return detail::two_bar_field(space, basis, params, pole, lo);  // feasible from below
}

}  // namespace rotopt
