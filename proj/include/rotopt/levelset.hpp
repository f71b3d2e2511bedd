#pragma once

#include "rotopt/mesh.hpp"
#include "rotopt/simplex.hpp"

#include <optional>

namespace rotopt {

/// Design-region function space: P1 nodes of the design submesh with the
/// consistent mass matrix used for all L2(D) inner products.
struct DesignSpace {
    SubMesh sub;
    SpMat mass;
    std::vector<int> design_col;  // parent element id -> design element index or -1
    const Mesh* mesh = nullptr;
    const P1Geometry* geo = nullptr;

    int node_count() const { return sub.size(); }
    int elem_count() const { return static_cast<int>(sub.elems.size()); }

    double inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const {
        double s = 0.0;
        for (int c = 0; c < a.cols(); ++c) s += a.col(c).dot(mass * b.col(c));
        return s;
    }
    double norm(const Eigen::MatrixXd& a) const { return std::sqrt(std::max(0.0, inner(a, a))); }
};

inline DesignSpace make_design_space(const Mesh& m, const P1Geometry& geo) {
    DesignSpace d;
    d.mesh = &m;
    d.geo = &geo;
    d.sub = make_submesh(m, {Region::Design});
    d.design_col.assign(m.tris.size(), -1);
    for (size_t k = 0; k < d.sub.elems.size(); ++k) d.design_col[d.sub.elems[k]] = static_cast<int>(k);
    std::vector<Triplet> trip;
    for (size_t k = 0; k < d.sub.elems.size(); ++k) {
        const double a = geo.area[d.sub.elems[k]];
        const auto& t = d.sub.tris[k];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip.emplace_back(t[i], t[j], a * (i == j ? 1.0 / 6.0 : 1.0 / 12.0));
    }
    d.mass.resize(d.sub.size(), d.sub.size());
    d.mass.setFromTriplets(trip.begin(), trip.end());
    return d;
}

/// Nodal level-set values, one row per design node, M-1 columns.
using LevelSetField = Eigen::MatrixXd;

inline LevelSetField normalized(const DesignSpace& space, LevelSetField psi) {
    const double n = space.norm(psi);
    if (!(n > 0)) throw InvalidInput("levelset: zero field cannot be normalized");
    return psi / n;
}

/// Per design element, the fractions of each material (columns sum to 1).
struct MaterialConfig {
    Eigen::ArrayXXd frac;  // M x n_design_elems

    /// Magnetic material of the fixed regions.
    static Material fixed_material(Region r) {
        switch (r) {
            case Region::StatorIron:
            case Region::Ring: return Material::Iron;
            default: return Material::Air;
        }
    }

    /// Material fractions of any parent element (one-hot outside the design region).
    Eigen::Vector4d fractions(const DesignSpace& space, int parent_elem) const {
        const int c = space.design_col[parent_elem];
        if (c >= 0) return frac.col(c).matrix();
        Eigen::Vector4d f = Eigen::Vector4d::Zero();
        f[static_cast<int>(fixed_material(space.mesh->region[parent_elem]))] = 1.0;
        return f;
    }
};

namespace detail {

template <typename V>
inline void cut_accumulate(const V& v0, const V& v1, const V& v2, double w, int depth,
                           const SectorBasis& basis, Eigen::ArrayXd& frac) {
    const int s0 = material_at(v0, basis), s1 = material_at(v1, basis), s2 = material_at(v2, basis);
    if (s0 == s1 && s1 == s2) {  // sectors are convex cones: linear interpolant stays inside
        frac[s0] += w;
        return;
    }
    if (depth == 0) {
        frac[material_at(((v0 + v1 + v2) / 3.0).eval(), basis)] += w;
        return;
    }
    const V m01 = 0.5 * (v0 + v1), m12 = 0.5 * (v1 + v2), m02 = 0.5 * (v0 + v2);
    cut_accumulate(v0, m01, m02, w / 4, depth - 1, basis, frac);
    cut_accumulate(m01, v1, m12, w / 4, depth - 1, basis, frac);
    cut_accumulate(m02, m12, v2, w / 4, depth - 1, basis, frac);
    cut_accumulate(m01, m12, m02, w / 4, depth - 1, basis, frac);
}

}  // namespace detail

/// Material fractions of a single triangle with vertex values v0, v1, v2.
inline Eigen::ArrayXd cut_fractions_triangle(const Vec& v0, const Vec& v1, const Vec& v2,
                                             const SectorBasis& basis, int depth = 4) {
    Eigen::ArrayXd f = Eigen::ArrayXd::Zero(basis.M);
    detail::cut_accumulate(v0, v1, v2, 1.0, depth, basis, f);
    return f;
}

/// Material fractions per design element from the linear level-set interpolant,
/// by recursive barycentric subdivision of cut elements.
inline MaterialConfig cut_ratios(const LevelSetField& psi, const DesignSpace& space,
                                 const SectorBasis& basis, int depth = 4) {
    MaterialConfig cfg;
    cfg.frac = Eigen::ArrayXXd::Zero(basis.M, space.elem_count());
    for (int k = 0; k < space.elem_count(); ++k) {
        const auto& t = space.sub.tris[k];
        cfg.frac.col(k) =
            cut_fractions_triangle(psi.row(t[0]).transpose(), psi.row(t[1]).transpose(),
                                   psi.row(t[2]).transpose(), basis, depth);
    }
    return cfg;
}

/// Vector-valued topological derivative at design nodes: row n holds
/// (d^{i->j} J)_{j != i} for the node's material i, ordered by j ascending.
struct TDField {
    Eigen::MatrixXd d;          // n_design_nodes x (M-1)
    std::vector<int> material;  // current material index per node
};

/// Generalized topological derivative g = N_i^{-1} d^i J per node.
inline Eigen::MatrixXd generalized_td(const TDField& td, const SectorBasis& basis) {
    Eigen::MatrixXd g(td.d.rows(), basis.M - 1);
    for (Eigen::Index n = 0; n < td.d.rows(); ++n)
        g.row(n) = (basis.normals_inv[td.material[n]] * td.d.row(n).transpose()).transpose();
    return g;
}

/// L2 angle between psi (assumed unit norm) and g. Empty when ||g|| = 0
/// (degenerate: reported as converged).
inline std::optional<double> optimality_angle(const DesignSpace& space, const LevelSetField& psi,
                                              const Eigen::MatrixXd& g) {
    const double ng = space.norm(g);
    if (!(ng > 0)) return std::nullopt;
    double c = space.inner(psi, g) / ng;
    c = std::max(-1.0, std::min(1.0, c));
    return std::acos(c);
}

/// Spherical interpolation step towards g/||g||; preserves ||psi|| = 1.
inline LevelSetField slerp_update(const DesignSpace& space, const LevelSetField& psi,
                                  const Eigen::MatrixXd& g, double s) {
    const auto theta_opt = optimality_angle(space, psi, g);
    if (!theta_opt) throw InvalidInput("slerp: zero generalized derivative");
    const double theta = *theta_opt;
    if (theta == 0.0) return psi;
    if (theta >= kPi - 1e-14) throw InvalidInput("slerp: antipodal fields, direction undefined");
    const double ng = space.norm(g);
    LevelSetField out =
        (std::sin((1.0 - s) * theta) * psi + std::sin(s * theta) / ng * g) / std::sin(theta);
    return normalized(space, out);
}

/// Material index per design node.
inline std::vector<int> node_materials(const LevelSetField& psi, const SectorBasis& basis) {
    std::vector<int> mat(psi.rows());
    for (Eigen::Index n = 0; n < psi.rows(); ++n) mat[n] = material_at(psi.row(n).transpose(), basis);
    return mat;
}

}  // namespace rotopt
