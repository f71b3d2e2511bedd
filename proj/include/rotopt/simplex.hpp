#pragma once

#include "rotopt/linalg.hpp"

#include <vector>

namespace rotopt {

/// Vertices of the regular (M-1)-simplex on the unit sphere and the sector
/// normal matrices N_i whose rows point into sector S_i. Material i occupies
/// the cone around vertex V_i.
struct SectorBasis {
    int M = 0;
    std::vector<Vec> vertices;             // M vectors in R^{M-1}
    std::vector<Eigen::MatrixXd> normals;  // N_i, rows ordered by j != i ascending
    std::vector<Eigen::MatrixXd> normals_inv;

    /// Ordered list of target materials j != i, matching the rows of N_i.
    std::vector<int> targets(int i) const {
        std::vector<int> t;
        for (int j = 0; j < M; ++j)
            if (j != i) t.push_back(j);
        return t;
    }
};

inline SectorBasis simplex_vertices(int M) {
    if (M < 2) throw InvalidInput("simplex: need at least 2 materials");
    SectorBasis b;
    b.M = M;
    for (int i = 1; i <= M; ++i) {
        Vec v(M - 1);
        for (int n = 1; n <= M - 1; ++n) {
            double val;
            if (n < i)
                val = -std::sqrt(double(M) / (double(M - 1) * (M - n) * (M - (n - 1))));
            else if (n == i)
                val = std::sqrt(double(M) * (M - n) / (double(M - 1) * (M - (n - 1))));
            else
                val = 0.0;
            v[n - 1] = val;
        }
        b.vertices.push_back(v);
    }
    for (int i = 0; i < M; ++i) {
        Eigen::MatrixXd N(M - 1, M - 1);
        int row = 0;
        for (int j = 0; j < M; ++j) {
            if (j == i) continue;
            Vec n = b.vertices[i] - b.vertices[j];
            N.row(row++) = n.transpose() / n.norm();
        }
        b.normals.push_back(N);
        b.normals_inv.push_back(N.inverse());
    }
    return b;
}

/// Sector membership: argmax_i psi . V_i, ties broken by lowest index.
inline int material_at(const Eigen::Ref<const Vec>& psi_value, const SectorBasis& basis) {
    int best = 0;
    double best_dot = psi_value.dot(basis.vertices[0]);
    for (int i = 1; i < basis.M; ++i) {
        const double d = psi_value.dot(basis.vertices[i]);
        if (d > best_dot + 0.0) {  // strict: ties keep the lower index
            best_dot = d;
            best = i;
        }
    }
    return best;
}

}  // namespace rotopt
