#pragma once

#include "rotopt/levelset.hpp"
#include "rotopt/materials.hpp"
#include "rotopt/mortar.hpp"
#include "rotopt/reduce.hpp"

#include <Eigen/SparseLU>

#include <memory>

namespace rotopt {

/// Assembly context for the magnetic problems on one pole: blended material
/// laws from the design fractions, anti-periodic/Dirichlet reduction of the
/// scalar potential, and the harmonic mortar coupling blocks.
class MagneticSystem {
public:
    MagneticSystem(const Mesh& mesh, const P1Geometry& geo, const DesignSpace& space,
                   const MaterialConfig& config, const BHLawSet& bh, const SourceParams& src,
                   int K_harmonics)
        : mesh_(&mesh), geo_(&geo), space_(&space), bh_(bh), src_(src),
          mortar_(K_harmonics, mesh.spec), red_(static_cast<int>(mesh.nodes.size())) {
        src_.pole_pairs = mesh.spec.pole_pairs;
        const int ne = static_cast<int>(mesh.tris.size());
        frac_.resize(ne);
        sigma_e_.resize(ne);
        for (int e = 0; e < ne; ++e) {
            frac_[e] = config.fractions(space, e);
            sigma_e_[e] = bh_.sigma_m * (frac_[e][2] + frac_[e][3]);
        }
        for (const auto& ed : mesh.edges.at("gamma_s")) {
            red_.set_dirichlet(ed[0]);
            red_.set_dirichlet(ed[1]);
        }
        auto tie_pairs = [&](const std::vector<std::array<int, 2>>& pairs) {
            for (const auto& p : pairs) red_.set_tie(p[1], {{p[0], -1.0}});
        };
        tie_pairs(mesh.pairs_rotor);
        tie_pairs(mesh.pairs_stator);
        red_.finalize();

        const int n = red_.n_full();
        C_S_ = mortar_pairing(mortar_, mesh, mesh.edges.at("gamma_stator"), n) * red_.P();
        C_R_ = mortar_pairing(mortar_, mesh, mesh.edges.at("gamma_rotor"), n) * red_.P();
        W_ = mortar_flux_pairing(mortar_, mesh, mesh.edges.at("gamma_rotor"), n) * red_.P();
        // Whole-machine scaling; the sign fixes the rotation sense so the
        // reference winding (A+, B-, C+ bands with increasing angle) drives
        // positive torque at the tabulated load angle.
        torque_scale_ = -mortar_.r_gamma * mesh.spec.pole_count() * mesh.spec.axial_length;
    }

    const Mesh& mesh() const { return *mesh_; }
    const P1Geometry& geo() const { return *geo_; }
    const DesignSpace& space() const { return *space_; }
    const BHLawSet& bh() const { return bh_; }
    const SourceParams& source() const { return src_; }
    const MortarSpace& mortar() const { return mortar_; }
    const Reducer& reducer() const { return red_; }
    int n_u() const { return red_.n_reduced(); }
    int n_lambda() const { return mortar_.K; }
    double sigma_of(int e) const { return sigma_e_[e]; }
    const Eigen::Vector4d& fractions(int e) const { return frac_[e]; }

    /// Additive single-element coefficient perturbations (gradient checks).
    void add_nu(int e, double d) {
        if (nu_pert_.size() == 0) nu_pert_ = Vec::Zero(mesh_->tris.size());
        nu_pert_[e] += d;
    }
    void add_sigma(int e, double d) { sigma_e_[e] += d; }

    /// Element-blended material law and Jacobian; `magnet_scale` scales the
    /// coercivity (used for load continuation).
    Vec2 h_elem(int e, const Vec2& b, double magnet_scale = 1.0) const {
        const auto& f = frac_[e];
        Vec2 h = Vec2::Zero();
        if (f[0] > 0) h += f[0] * bh_.h_iron(b);
        if (f[1] > 0) h += f[1] * bh_.nu0 * b;
        if (f[2] > 0) h += f[2] * (bh_.nu_m * b - magnet_scale * bh_.coercivity(Material::Magnet1));
        if (f[3] > 0) h += f[3] * (bh_.nu_m * b - magnet_scale * bh_.coercivity(Material::Magnet2));
        if (nu_pert_.size()) h += nu_pert_[e] * b;
        return h;
    }
    Mat2 dh_elem(int e, const Vec2& b) const {
        const auto& f = frac_[e];
        Mat2 J = ((f[1]) * bh_.nu0 + (f[2] + f[3]) * bh_.nu_m) * Mat2::Identity();
        if (f[0] > 0) J += f[0] * bh_.dh_iron(b);
        if (nu_pert_.size()) J += nu_pert_[e] * Mat2::Identity();
        return J;
    }

    Vec2 curl_of(const Vec& u_full, int e) const {
        const auto& t = mesh_->tris[e];
        Vec2 g = u_full[t[0]] * geo_->grad[e].col(0) + u_full[t[1]] * geo_->grad[e].col(1) +
                 u_full[t[2]] * geo_->grad[e].col(2);
        return curl_from_grad(g);
    }

    /// Nodal residual of the curl-curl operator, including the magnet source.
    Vec assemble_A(const Vec& u_full, double magnet_scale = 1.0) const {
        Vec r = Vec::Zero(red_.n_full());
        for (size_t e = 0; e < mesh_->tris.size(); ++e) {
            const Vec2 h = h_elem(static_cast<int>(e), curl_of(u_full, static_cast<int>(e)),
                                  magnet_scale);
            const auto& t = mesh_->tris[e];
            for (int i = 0; i < 3; ++i)
                r[t[i]] += geo_->area[e] * h.dot(curl_from_grad(geo_->grad[e].col(i)));
        }
        return r;
    }

    /// Nodal coil source at source angle alpha.
    Vec assemble_j(double alpha_src, double scale = 1.0) const {
        Vec r = Vec::Zero(red_.n_full());
        for (size_t e = 0; e < mesh_->tris.size(); ++e) {
            const Region reg = mesh_->region[e];
            if (reg != Region::CoilA && reg != Region::CoilB && reg != Region::CoilC) continue;
            const double j = scale * src_.density(reg, alpha_src);
            const auto& t = mesh_->tris[e];
            for (int i = 0; i < 3; ++i) r[t[i]] += geo_->area[e] / 3.0 * j;
        }
        return r;
    }

    /// Reduced tangent stiffness at the expanded state.
    SpMat assemble_dA(const Vec& u_full) const {
        std::vector<Triplet> trip;
        trip.reserve(mesh_->tris.size() * 9);
        for (size_t e = 0; e < mesh_->tris.size(); ++e) {
            const Mat2 dh = dh_elem(static_cast<int>(e), curl_of(u_full, static_cast<int>(e)));
            const auto& t = mesh_->tris[e];
            Eigen::Matrix<double, 2, 3> cb;
            for (int i = 0; i < 3; ++i) cb.col(i) = curl_from_grad(geo_->grad[e].col(i));
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    trip.emplace_back(t[i], t[j], geo_->area[e] * cb.col(i).dot(dh * cb.col(j)));
        }
        SpMat A(red_.n_full(), red_.n_full());
        A.setFromTriplets(trip.begin(), trip.end());
        return red_.reduce(A);
    }

    /// Consistent mass matrix weighted by the element conductivity (reduced).
    SpMat assemble_sigma_mass() const {
        std::vector<Triplet> trip;
        for (size_t e = 0; e < mesh_->tris.size(); ++e) {
            if (sigma_e_[e] == 0.0) continue;
            const auto& t = mesh_->tris[e];
            const double a = sigma_e_[e] * geo_->area[e];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    trip.emplace_back(t[i], t[j], a * (i == j ? 1.0 / 6.0 : 1.0 / 12.0));
        }
        SpMat M(red_.n_full(), red_.n_full());
        M.setFromTriplets(trip.begin(), trip.end());
        return red_.reduce(M);
    }

    /// Mortar jump operator B(alpha) = C_S - G(alpha) C_R, K x n_u.
    SpMat B_of(double alpha_mech) const {
        return C_S_ - (mortar_.phase(alpha_mech) * C_R_).sparseView();
    }

    /// Whole-machine torque r_Gamma <lambda, (curl u . n) o rho_{-alpha}>,
    /// scaled by pole count and axial length.
    double torque(const Vec& u_red, const Vec& lambda, double alpha_mech) const {
        return torque_scale_ * lambda.dot(mortar_.phase(alpha_mech) * (W_ * u_red));
    }
    /// Gradient of the torque w.r.t. (u_red, lambda).
    Vec torque_grad_u(const Vec& lambda, double alpha_mech) const {
        return torque_scale_ * (W_.transpose() * (mortar_.phase(alpha_mech).transpose() * lambda));
    }
    Vec torque_grad_lambda(const Vec& u_red, double alpha_mech) const {
        return torque_scale_ * (mortar_.phase(alpha_mech) * (W_ * u_red));
    }

    /// Projection of the trace jump onto the multiplier space (residual check).
    Vec mortar_jump(const Vec& u_red, double alpha_mech) const { return B_of(alpha_mech) * u_red; }

private:
    const Mesh* mesh_;
    const P1Geometry* geo_;
    const DesignSpace* space_;
    BHLawSet bh_;
    SourceParams src_;
    MortarSpace mortar_;
    Reducer red_;
    SpMat C_S_, C_R_, W_;
    std::vector<Eigen::Vector4d> frac_;
    Vec sigma_e_;
    Vec nu_pert_;
    double torque_scale_ = 0.0;
};

/// Saddle-point Newton state of one rotor position.
struct StaticSolution {
    Vec u_red, lambda;
    Vec u_full;
    double alpha_mech = 0.0, alpha_src = 0.0;
    int newton_iters = 0;
};

namespace detail {

inline SpMat saddle_matrix(const SpMat& A, const SpMat& B) {
    const int n = static_cast<int>(A.rows()), K = static_cast<int>(B.rows());
    std::vector<Triplet> trip;
    trip.reserve(A.nonZeros() + 2 * B.nonZeros());
    for (int c = 0; c < A.outerSize(); ++c)
        for (SpMat::InnerIterator it(A, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (int c = 0; c < B.outerSize(); ++c)
        for (SpMat::InnerIterator it(B, c); it; ++it) {
            trip.emplace_back(n + it.row(), it.col(), it.value());
            trip.emplace_back(it.col(), n + it.row(), it.value());
        }
    SpMat J(n + K, n + K);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
}

}  // namespace detail

/// Damped Newton solve of the mortar magnetostatic saddle system at rotor
/// position alpha_mech with sources evaluated at alpha_src.
inline StaticSolution solve_magnetostatic(const MagneticSystem& sys, double alpha_mech,
                                          double alpha_src, const StaticSolution* warm = nullptr,
                                          double tol = 1e-8, double source_scale = 1.0,
                                          int max_iters = 50) {
    const int n = sys.n_u(), K = sys.n_lambda();
    StaticSolution sol;
    sol.alpha_mech = alpha_mech;
    sol.alpha_src = alpha_src;
    sol.u_red = warm ? warm->u_red : Vec::Zero(n);
    sol.lambda = warm ? warm->lambda : Vec::Zero(K);

    const SpMat B = sys.B_of(alpha_mech);
    const Vec j_red = sys.reducer().reduce(sys.assemble_j(alpha_src, source_scale));

    auto residual = [&](const Vec& u, const Vec& lam) {
        Vec r(n + K);
        r.head(n) = sys.reducer().reduce(sys.assemble_A(sys.reducer().expand(u), source_scale)) -
                    j_red + B.transpose() * lam;
        r.tail(K) = B * u;
        return r;
    };

    const double base =
        std::max((sys.reducer().reduce(sys.assemble_A(Vec::Zero(sys.reducer().n_full()),
                                                      source_scale)) - j_red).norm(), 1e-300);
    Vec r = residual(sol.u_red, sol.lambda);
    for (int it = 0; it < max_iters; ++it) {
        if (r.norm() <= tol * base) {
            sol.newton_iters = it;
            sol.u_full = sys.reducer().expand(sol.u_red);
            return sol;
        }
        const SpMat A = sys.assemble_dA(sys.reducer().expand(sol.u_red));
        const SpMat J = detail::saddle_matrix(A, B);
        Eigen::SparseLU<SpMat> lu(J);
        if (lu.info() != Eigen::Success) throw SolveFailure("magnetostatics: singular Newton matrix");
        const Vec d = lu.solve(-r);

        double s = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= 10; ++halving) {
            Vec u_try = sol.u_red + s * d.head(n);
            Vec l_try = sol.lambda + s * d.tail(K);
            Vec r_try = residual(u_try, l_try);
            if (r_try.norm() < r.norm() || r_try.norm() <= tol * base) {
                sol.u_red = u_try;
                sol.lambda = l_try;
                r = r_try;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) {
            if (r.norm() <= 1e-8 * base) {  // stalled at the contract tolerance
                sol.newton_iters = it + 1;
                sol.u_full = sys.reducer().expand(sol.u_red);
                return sol;
            }
            throw SolveFailure("magnetostatics: line search stalled, residual " +
                               std::to_string(r.norm() / base));
        }
    }
    throw SolveFailure("magnetostatics: Newton did not converge, residual " +
                       std::to_string(r.norm() / base));
}

/// Retries a failed solve with the sources ramped up in two stages.
inline StaticSolution solve_magnetostatic_robust(const MagneticSystem& sys, double alpha_mech,
                                                 double alpha_src,
                                                 const StaticSolution* warm = nullptr,
                                                 double tol = 1e-8) {
    try {
        return solve_magnetostatic(sys, alpha_mech, alpha_src, warm, tol);
    } catch (const SolveFailure&) {
        StaticSolution half = solve_magnetostatic(sys, alpha_mech, alpha_src, warm, 1e-6, 0.5);
        return solve_magnetostatic(sys, alpha_mech, alpha_src, &half, tol, 1.0);
    }
}

/// Adjoint of the static problem. The system matrix is the transpose of the
/// Newton matrix linearized at the converged state; the saddle structure is
/// symmetric, so no explicit transpose is needed.
inline std::pair<Vec, Vec> solve_adjoint_static(const MagneticSystem& sys,
                                                const StaticSolution& sol, const Vec& rhs_u,
                                                const Vec& rhs_lambda) {
    const int n = sys.n_u(), K = sys.n_lambda();
    const SpMat A = sys.assemble_dA(sol.u_full);
    const SpMat J = detail::saddle_matrix(A, sys.B_of(sol.alpha_mech));
    Eigen::SparseLU<SpMat> lu(J);
    if (lu.info() != Eigen::Success) throw SolveFailure("adjoint: singular system");
    Vec rhs(n + K);
    rhs.head(n) = rhs_u;
    rhs.tail(K) = rhs_lambda;
    const Vec x = lu.solve(rhs);
    const double res = (J * x - rhs).norm();
    if (res > 1e-10 * std::max(1.0, rhs.norm())) throw SolveFailure("adjoint: residual too large");
    return {x.head(n), x.tail(K)};
}

}  // namespace rotopt
