#pragma once

#include "rotopt/levelset.hpp"

#include <Eigen/SparseCholesky>

namespace rotopt {

/// Screened Poisson regularizer on the design region:
/// -rho Lap g~ + g~ = g with natural (zero-flux) boundary, solved per component.
class ScreenedPoissonSmoother {
public:
    ScreenedPoissonSmoother(const DesignSpace& space, double rho) : space_(&space), rho_(rho) {
        if (!(rho > 0)) throw InvalidInput("smoothing: rho must be positive");
        std::vector<Triplet> trip;
        for (size_t k = 0; k < space.sub.elems.size(); ++k) {
            const int e = space.sub.elems[k];
            const auto& t = space.sub.tris[k];
            const auto& g = space.geo->grad[e];
            const double a = space.geo->area[e];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    trip.emplace_back(t[i], t[j], rho * a * g.col(i).dot(g.col(j)));
        }
        SpMat A(space.sub.size(), space.sub.size());
        A.setFromTriplets(trip.begin(), trip.end());
        A += space.mass;
        fact_.compute(A);
        if (fact_.info() != Eigen::Success) throw SolveFailure("smoothing: factorization failed");
        A_ = std::move(A);
    }

    /// Smooths each column of a nodal field on the design space.
    Eigen::MatrixXd apply(const Eigen::MatrixXd& nodal) const {
        Eigen::MatrixXd out(nodal.rows(), nodal.cols());
        for (int c = 0; c < nodal.cols(); ++c) {
            Vec rhs = space_->mass * nodal.col(c);
            Vec x = fact_.solve(rhs);
            if (fact_.info() != Eigen::Success) throw SolveFailure("smoothing: solve failed");
            const double rn = (A_ * x - rhs).norm();
            if (rn > 1e-10 * std::max(1.0, rhs.norm()))
                throw SolveFailure("smoothing: residual too large");
            out.col(c) = x;
        }
        return out;
    }

private:
    const DesignSpace* space_;
    double rho_;
    SpMat A_;
    Eigen::SimplicialLDLT<SpMat> fact_;
};

}  // namespace rotopt
