#pragma once

#include "rotopt/levelset.hpp"

#include <set>

namespace rotopt {

/// Volume cap on a subset of materials: V(Omega) = sum_{i in M_V} |Omega_i| <= cap.
struct VolumeBudget {
    std::set<int> materials = {static_cast<int>(Material::Magnet1),
                               static_cast<int>(Material::Magnet2)};
    double cap = 0.0;  // m^2 (per pole)

    void validate(int M) const {
        if (materials.empty() || static_cast<int>(materials.size()) >= M)
            throw InvalidInput("budget: constrained set must be a proper nonempty subset");
        if (!(cap > 0)) throw InvalidInput("budget: cap must be positive");
    }
};

/// Constrained-material area of the design region.
inline double volume(const MaterialConfig& config, const DesignSpace& space,
                     const VolumeBudget& budget) {
    double v = 0.0;
    for (int k = 0; k < space.elem_count(); ++k) {
        double f = 0.0;
        for (int m : budget.materials) f += config.frac(m, k);
        v += space.geo->area[space.sub.elems[k]] * f;
    }
    return v;
}

/// Topological derivative of the volume functional: d^{i->j} V = -[i in M_V] + [j in M_V].
/// Returned as the full pair matrix (row i, column j), spatially constant.
inline Eigen::MatrixXd volume_td_matrix(const VolumeBudget& budget, int M) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(M, M);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            if (i == j) continue;
            d(i, j) = -(budget.materials.count(i) ? 1.0 : 0.0) +
                      (budget.materials.count(j) ? 1.0 : 0.0);
        }
    return d;
}

}  // namespace rotopt
