#pragma once

#include "rotopt/geometry.hpp"
#include "rotopt/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace rotopt {

/// Conforming P1 triangle mesh of one pole. Rotor and stator are meshed
/// independently (disjoint node blocks) and coupled only through the mortar
/// circle Gamma between them.
struct Mesh {
    MachineSpec spec;
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> tris;  // CCW
    std::vector<Region> region;            // per element
    int rotor_node_count = 0;              // nodes [0, rotor_node_count) belong to the rotor
    int rotor_tri_count = 0;

    // Boundary and interface edge sets, oriented with increasing angle.
    // True boundary: bore, gamma_rotor, gamma_stator, gamma_s, gamma_1, gamma_2.
    // Interior circles kept as named sets: gamma_sh (shaft surface), gamma_r (rotor surface).
    std::map<std::string, std::vector<std::array<int, 2>>> edges;

    // Anti-periodic node pairs (master on Gamma_1, slave on Gamma_2), same radius.
    std::vector<std::array<int, 2>> pairs_rotor, pairs_stator;

    bool is_rotor_node(int n) const { return n < rotor_node_count; }
    bool is_rotor_tri(int e) const { return e < rotor_tri_count; }

    double node_radius(int n) const { return nodes[n].norm(); }
    double node_angle(int n) const { return std::atan2(nodes[n].y(), nodes[n].x()); }
};

/// Per-element P1 geometry: areas, basis gradients, centroids.
struct P1Geometry {
    std::vector<double> area;
    std::vector<Eigen::Matrix<double, 2, 3>> grad;  // column k = grad of basis at local node k
    std::vector<Vec2> centroid;

    explicit P1Geometry(const Mesh& m) {
        const int ne = static_cast<int>(m.tris.size());
        area.resize(ne);
        grad.resize(ne);
        centroid.resize(ne);
        for (int e = 0; e < ne; ++e) {
            const auto& t = m.tris[e];
            const Vec2 a = m.nodes[t[0]], b = m.nodes[t[1]], c = m.nodes[t[2]];
            const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
            area[e] = 0.5 * det;
            if (area[e] <= 0) throw InvalidInput("mesh: non-CCW or degenerate triangle");
            centroid[e] = (a + b + c) / 3.0;
            grad[e].col(0) = Vec2(b.y() - c.y(), c.x() - b.x()) / det;
            grad[e].col(1) = Vec2(c.y() - a.y(), a.x() - c.x()) / det;
            grad[e].col(2) = Vec2(a.y() - b.y(), b.x() - a.x()) / det;
        }
    }
};

namespace detail {

/// Splits [r0, r1] into `layers` uniform sub-radii (r0 excluded, r1 included).
inline void append_band(std::vector<double>& radii, std::vector<Region>& band_of_layer,
                        double r0, double r1, int layers, Region reg) {
    for (int i = 1; i <= layers; ++i) {
        radii.push_back(r0 + (r1 - r0) * i / layers);
        band_of_layer.push_back(reg);
    }
}

inline int layers_for(double width, double h, int min_layers) {
    return std::max(min_layers, static_cast<int>(std::lround(std::ceil(width / h - 0.25))));
}

struct GridPart {
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> tris;
    std::vector<Region> region;
    std::vector<double> radii;  // node rows
    int nphi = 0;
    int node(int row, int col) const { return row * (nphi + 1) + col; }
};

inline GridPart build_annular_grid(const std::vector<double>& breakpoints,
                                   const std::vector<Region>& band_region,
                                   const std::vector<int>& band_layers, int nphi,
                                   double phi0, double phi1) {
    GridPart g;
    g.nphi = nphi;
    g.radii.push_back(breakpoints.front());
    std::vector<Region> row_band;  // region of the band above each node row
    for (size_t b = 0; b + 1 < breakpoints.size(); ++b)
        append_band(g.radii, row_band, breakpoints[b], breakpoints[b + 1], band_layers[b],
                    band_region[b]);
    const int nrow = static_cast<int>(g.radii.size());
    for (int i = 0; i < nrow; ++i)
        for (int j = 0; j <= nphi; ++j) {
            const double phi = phi0 + (phi1 - phi0) * j / nphi;
            g.nodes.push_back(g.radii[i] * unit_vector(phi));
        }
    for (int i = 0; i + 1 < nrow; ++i)
        for (int j = 0; j < nphi; ++j) {
            const int a = g.node(i, j), b = g.node(i, j + 1);
            const int c = g.node(i + 1, j), d = g.node(i + 1, j + 1);
            g.tris.push_back({a, c, d});
            g.tris.push_back({a, d, b});
            g.region.push_back(row_band[i]);
            g.region.push_back(row_band[i]);
        }
    return g;
}

}  // namespace detail

/// Builds the pole mesh. Radial layer counts follow target_h with minimum
/// resolutions for the ring (2 layers) and each air-gap half (1 layer); the
/// angular resolution near the gap is capped for element aspect ratio, and the
/// stator count is a multiple of 4*slots_per_pole so slot openings fall on
/// mesh lines.
inline Mesh build_pole_mesh(const MachineSpec& spec, double target_h) {
    spec.validate();
    if (!(target_h > 0)) throw InvalidInput("mesh: target_h must be positive");

    Mesh m;
    m.spec = spec;
    const double r_bore = spec.rotor_inner_radius, r_sh = spec.shaft_outer_radius;
    const double r_ring = spec.ring_inner_radius(), r_rot = spec.rotor_outer_radius;
    const double r_mortar = spec.mortar_radius(), r_sin = spec.stator_inner_radius;
    const double r_slot0 = spec.slot_inner_radius, r_slot1 = spec.slot_outer_radius;
    const double r_out = spec.stator_outer_radius;
    const double pole = spec.pole_angle();

    using detail::layers_for;
    const double half_gap = 0.5 * spec.air_gap_width;
    const int gap_layers = target_h <= 2.1e-3 ? 2 : 1;

    // Tangential target near the air gap: finer than target_h, capped by aspect ratio.
    const double t_gap = std::max(0.6 * target_h, 1.0e-3);
    const int nphi_rotor = std::max(8, static_cast<int>(std::ceil(pole * r_mortar / t_gap)));
    const int slot_div = 4 * spec.slots_per_pole();
    const int nphi_stator =
        slot_div * std::max(1, static_cast<int>(std::ceil(pole * r_mortar / t_gap / slot_div)));

    auto rotor = detail::build_annular_grid(
        {r_bore, r_sh, r_ring, r_rot, r_mortar},
        {Region::Shaft, Region::Design, Region::Ring, Region::AirGapRotor},
        {layers_for(r_sh - r_bore, target_h, 1), layers_for(r_ring - r_sh, target_h, 2),
         std::max(2, layers_for(spec.iron_ring_width, target_h, 2)), gap_layers},
        nphi_rotor, 0.0, pole);
    auto stator = detail::build_annular_grid(
        {r_mortar, r_sin, r_slot0, r_slot1, r_out},
        {Region::AirGapStator, Region::StatorIron, Region::StatorIron, Region::StatorIron},
        {gap_layers, layers_for(r_slot0 - r_sin, target_h, 1),
         layers_for(r_slot1 - r_slot0, target_h, 2), layers_for(r_out - r_slot1, target_h, 1)},
        nphi_stator, 0.0, pole);

    // Mark coil elements inside the slot band.
    const auto spans = spec.coil_spans();
    for (size_t e = 0; e < stator.tris.size(); ++e) {
        const auto& t = stator.tris[e];
        Vec2 c = (stator.nodes[t[0]] + stator.nodes[t[1]] + stator.nodes[t[2]]) / 3.0;
        const double r = c.norm(), phi = std::atan2(c.y(), c.x());
        if (r > r_slot0 && r < r_slot1)
            for (const auto& s : spans)
                if (phi > s.start && phi < s.end) { stator.region[e] = s.phase; break; }
    }

    m.nodes = rotor.nodes;
    m.nodes.insert(m.nodes.end(), stator.nodes.begin(), stator.nodes.end());
    m.tris = rotor.tris;
    const int off = static_cast<int>(rotor.nodes.size());
    for (auto t : stator.tris) m.tris.push_back({t[0] + off, t[1] + off, t[2] + off});
    m.region = rotor.region;
    m.region.insert(m.region.end(), stator.region.begin(), stator.region.end());
    m.rotor_node_count = off;
    m.rotor_tri_count = static_cast<int>(rotor.tris.size());

    auto add_ring_edges = [&](const detail::GridPart& g, int base, int row, const std::string& name) {
        for (int j = 0; j < g.nphi; ++j)
            m.edges[name].push_back({base + g.node(row, j), base + g.node(row, j + 1)});
    };
    auto row_of_radius = [](const detail::GridPart& g, double r) {
        for (size_t i = 0; i < g.radii.size(); ++i)
            if (std::abs(g.radii[i] - r) < 1e-12) return static_cast<int>(i);
        throw InvalidInput("mesh: breakpoint radius not found in node rows");
    };
    add_ring_edges(rotor, 0, 0, "bore");
    add_ring_edges(rotor, 0, row_of_radius(rotor, r_sh), "gamma_sh");
    add_ring_edges(rotor, 0, row_of_radius(rotor, r_rot), "gamma_r");
    add_ring_edges(rotor, 0, static_cast<int>(rotor.radii.size()) - 1, "gamma_rotor");
    add_ring_edges(stator, off, 0, "gamma_stator");
    add_ring_edges(stator, off, static_cast<int>(stator.radii.size()) - 1, "gamma_s");

    auto add_radial = [&](const detail::GridPart& g, int base) {
        const int nrow = static_cast<int>(g.radii.size());
        for (int i = 0; i + 1 < nrow; ++i) {
            m.edges["gamma_1"].push_back({base + g.node(i, 0), base + g.node(i + 1, 0)});
            m.edges["gamma_2"].push_back({base + g.node(i, g.nphi), base + g.node(i + 1, g.nphi)});
        }
    };
    add_radial(rotor, 0);
    add_radial(stator, off);

    auto add_pairs = [&](const detail::GridPart& g, int base, std::vector<std::array<int, 2>>& out) {
        for (size_t i = 0; i < g.radii.size(); ++i)
            out.push_back({base + g.node(static_cast<int>(i), 0),
                           base + g.node(static_cast<int>(i), g.nphi)});
    };
    add_pairs(rotor, 0, m.pairs_rotor);
    add_pairs(stator, off, m.pairs_stator);
    return m;
}

/// Counts element layers across the annulus [r0, r1] by binning centroid radii.
inline int count_radial_layers(const Mesh& m, const P1Geometry& geo, double r0, double r1) {
    std::set<long> bins;
    for (size_t e = 0; e < m.tris.size(); ++e) {
        const double r = geo.centroid[e].norm();
        if (r > r0 + 1e-12 && r < r1 - 1e-12)
            bins.insert(std::lround((r - r0) / (r1 - r0) * 1e6));
    }
    // Cluster near-equal radii (one cluster per layer of the structured grid).
    int layers = 0;
    long last = -1000000;
    for (long b : bins) {
        if (b - last > 1000) ++layers;
        last = b;
    }
    return layers;
}

/// Integral of a nodal P1 field over the named regions (3-point quadrature, exact for P1).
inline double integrate_nodal(const Mesh& m, const P1Geometry& geo, const Vec& nodal,
                              const std::set<Region>& regions) {
    double s = 0.0;
    for (size_t e = 0; e < m.tris.size(); ++e) {
        if (!regions.count(m.region[e])) continue;
        const auto& t = m.tris[e];
        s += geo.area[e] / 3.0 * (nodal[t[0]] + nodal[t[1]] + nodal[t[2]]);
    }
    return s;
}

/// Integral of an element-wise constant field over the named regions.
inline double integrate_element(const Mesh& m, const P1Geometry& geo, const Vec& elem,
                                const std::set<Region>& regions) {
    double s = 0.0;
    for (size_t e = 0; e < m.tris.size(); ++e)
        if (regions.count(m.region[e])) s += geo.area[e] * elem[static_cast<int>(e)];
    return s;
}

inline double region_area(const Mesh& m, const P1Geometry& geo, const std::set<Region>& regions) {
    double s = 0.0;
    for (size_t e = 0; e < m.tris.size(); ++e)
        if (regions.count(m.region[e])) s += geo.area[e];
    return s;
}

/// Restriction of the mesh to a set of regions, with local node numbering.
struct SubMesh {
    const Mesh* parent = nullptr;
    std::vector<int> elems;          // parent element ids
    std::vector<int> nodes;          // parent node ids, ascending
    std::vector<int> local_of_node;  // parent node id -> local id or -1
    std::vector<std::array<int, 3>> tris;  // local ids
    std::map<std::string, std::vector<std::array<int, 2>>> edges;  // local ids
    std::vector<std::array<int, 2>> periodic_pairs;                // local ids

    int local(int parent_node) const { return local_of_node[parent_node]; }
    int size() const { return static_cast<int>(nodes.size()); }
};

inline SubMesh make_submesh(const Mesh& m, const std::set<Region>& regions) {
    SubMesh s;
    s.parent = &m;
    s.local_of_node.assign(m.nodes.size(), -1);
    for (size_t e = 0; e < m.tris.size(); ++e)
        if (regions.count(m.region[e])) s.elems.push_back(static_cast<int>(e));
    for (int e : s.elems)
        for (int n : m.tris[e])
            if (s.local_of_node[n] < 0) s.local_of_node[n] = 0;
    for (size_t n = 0; n < m.nodes.size(); ++n)
        if (s.local_of_node[n] == 0) {
            s.local_of_node[n] = static_cast<int>(s.nodes.size());
            s.nodes.push_back(static_cast<int>(n));
        }
    for (int e : s.elems) {
        const auto& t = m.tris[e];
        s.tris.push_back({s.local(t[0]), s.local(t[1]), s.local(t[2])});
    }
    for (const auto& [name, list] : m.edges) {
        for (const auto& ed : list)
            if (s.local_of_node[ed[0]] >= 0 && s.local_of_node[ed[1]] >= 0)
                s.edges[name].push_back({s.local(ed[0]), s.local(ed[1])});
    }
    auto add_pairs = [&](const std::vector<std::array<int, 2>>& pairs) {
        for (const auto& p : pairs)
            if (s.local_of_node[p[0]] >= 0 && s.local_of_node[p[1]] >= 0)
                s.periodic_pairs.push_back({s.local(p[0]), s.local(p[1])});
    };
    add_pairs(m.pairs_rotor);
    add_pairs(m.pairs_stator);
    return s;
}

/// Writes the mesh with region labels (and optional cell/point fields) as legacy ASCII VTK.
inline void write_vtk(const std::string& path, const Mesh& m,
                      const std::vector<std::pair<std::string, Vec>>& cell_fields = {},
                      const std::vector<std::pair<std::string, Vec>>& point_fields = {}) {
    std::ofstream f(path);
    if (!f) throw InvalidInput("vtk: cannot open " + path);
    f << "# vtk DataFile Version 3.0\nrotopt mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    f << "POINTS " << m.nodes.size() << " double\n";
    f.precision(12);
    for (const auto& p : m.nodes) f << p.x() << " " << p.y() << " 0\n";
    f << "CELLS " << m.tris.size() << " " << 4 * m.tris.size() << "\n";
    for (const auto& t : m.tris) f << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    f << "CELL_TYPES " << m.tris.size() << "\n";
    for (size_t e = 0; e < m.tris.size(); ++e) f << "5\n";
    f << "CELL_DATA " << m.tris.size() << "\nSCALARS region int 1\nLOOKUP_TABLE default\n";
    for (auto r : m.region) f << static_cast<int>(r) << "\n";
    for (const auto& [name, v] : cell_fields) {
        f << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (Eigen::Index i = 0; i < v.size(); ++i) f << v[i] << "\n";
    }
    if (!point_fields.empty()) {
        f << "POINT_DATA " << m.nodes.size() << "\n";
        for (const auto& [name, v] : point_fields) {
            f << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (Eigen::Index i = 0; i < v.size(); ++i) f << v[i] << "\n";
        }
    }
}

}  // namespace rotopt
