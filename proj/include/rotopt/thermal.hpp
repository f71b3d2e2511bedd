#pragma once

#include "rotopt/quasistatic.hpp"

#include <Eigen/SparseCholesky>

#include <functional>
#include <iostream>
#include <map>
#include <numeric>

namespace rotopt {

/// Time-averaged eddy-current loss density per element of the rotor thermal
/// domain (design annulus + iron ring), with the per-magnet spatial average of
/// the current removed. Intermediate quantities are kept for the adjoint.
struct LossField {
    Vec P;                              // W/m^3, per thermal-domain element
    std::vector<Vec> D;                 // per position: centroid differences u^n - u^{n-1}
    std::vector<Eigen::Vector2d> mean;  // per position: magnet-region means of D
    double N = 1, tau = 1;
};

/// Rotor thermal domain: stationary heat equation with Robin exchange on the
/// shaft surface and the rotor surface, periodic in the pole angle.
class ThermalSystem {
public:
    ThermalSystem(const Mesh& mesh, const P1Geometry& geo, const DesignSpace& space,
                  const MaterialConfig& config, const ThermalParams& params)
        : mesh_(&mesh), geo_(&geo), space_(&space), params_(params),
          sub_(make_submesh(mesh, {Region::Design, Region::Ring})),
          red_(static_cast<int>(sub_.nodes.size())) {
        const int ne = static_cast<int>(sub_.elems.size());
        lambda_e_.resize(ne);
        c_e_.resize(ne);
        frac_m1_.resize(ne);
        frac_m2_.resize(ne);
        for (int k = 0; k < ne; ++k) {
            const Eigen::Vector4d f = config.fractions(space, sub_.elems[k]);
            lambda_e_[k] = f[0] * params.lambda(Material::Iron) + f[1] * params.lambda(Material::Air) +
                           (f[2] + f[3]) * params.lambda(Material::Magnet1);
            c_e_[k] = f[2] + f[3];
            frac_m1_[k] = f[2];
            frac_m2_[k] = f[3];
        }
        for (const auto& p : sub_.periodic_pairs) red_.set_tie(p[1], {{p[0], 1.0}});
        red_.finalize();

        std::vector<Triplet> trip;
        for (int k = 0; k < ne; ++k) {
            const int e = sub_.elems[k];
            const auto& t = sub_.tris[k];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    trip.emplace_back(t[i], t[j], lambda_e_[k] * geo.area[e] *
                                                      geo.grad[e].col(i).dot(geo.grad[e].col(j)));
        }
        robin_rhs_ = Vec::Zero(sub_.size());
        auto add_robin = [&](const std::string& name, double beta) {
            for (const auto& ed : sub_.edges.at(name)) {
                const double len = (mesh.nodes[sub_.nodes[ed[0]]] - mesh.nodes[sub_.nodes[ed[1]]]).norm();
                trip.emplace_back(ed[0], ed[0], beta * len / 3.0);
                trip.emplace_back(ed[1], ed[1], beta * len / 3.0);
                trip.emplace_back(ed[0], ed[1], beta * len / 6.0);
                trip.emplace_back(ed[1], ed[0], beta * len / 6.0);
                robin_rhs_[ed[0]] += beta * params.theta0 * len / 2.0;
                robin_rhs_[ed[1]] += beta * params.theta0 * len / 2.0;
            }
        };
        add_robin("gamma_sh", params.beta_sh);
        add_robin("gamma_r", params.beta_ag);
        SpMat K(sub_.size(), sub_.size());
        K.setFromTriplets(trip.begin(), trip.end());
        K_red_ = red_.reduce(K);
        fact_.compute(K_red_);
        if (fact_.info() != Eigen::Success)
            throw SolveFailure("thermal: singular system (all transfer coefficients zero?)");
    }

    const SubMesh& domain() const { return sub_; }
    const ThermalParams& params() const { return params_; }
    double conductivity(int k) const { return lambda_e_[k]; }
    double mask(int k) const { return c_e_[k]; }

    /// Solves for the nodal temperature given an element-wise loss density.
    Vec solve(const Vec& loss_elem) const {
        Vec rhs = robin_rhs_;
        for (size_t k = 0; k < sub_.elems.size(); ++k) {
            const double s = loss_elem[static_cast<int>(k)] * geo_->area[sub_.elems[k]] / 3.0;
            for (int i = 0; i < 3; ++i) rhs[sub_.tris[k][i]] += s;
        }
        return solve_reduced(red_.reduce(rhs));
    }

    /// Solves the (self-adjoint) system with a given nodal right-hand side.
    Vec solve_adjoint(const Vec& rhs_nodal) const { return solve_reduced(red_.reduce(rhs_nodal)); }

    /// Quadratic temperature penalty over the magnets, element-centroid rule.
    double penalty(const Vec& theta) const {
        double c = 0.0;
        for (size_t k = 0; k < sub_.elems.size(); ++k)
            c += geo_->area[sub_.elems[k]] * c_e_[k] *
                 theta_penalty(centroid_value(theta, static_cast<int>(k)), params_.T_star);
        return c;
    }
    Vec penalty_grad(const Vec& theta) const {
        Vec g = Vec::Zero(sub_.size());
        for (size_t k = 0; k < sub_.elems.size(); ++k) {
            const double d = geo_->area[sub_.elems[k]] * c_e_[k] / 3.0 *
                             theta_penalty_deriv(centroid_value(theta, static_cast<int>(k)),
                                                 params_.T_star);
            for (int i = 0; i < 3; ++i) g[sub_.tris[k][i]] += d;
        }
        return g;
    }

    double centroid_value(const Vec& nodal, int k) const {
        const auto& t = sub_.tris[k];
        return (nodal[t[0]] + nodal[t[1]] + nodal[t[2]]) / 3.0;
    }
    Vec2 centroid_gradient(const Vec& nodal, int k) const {
        const int e = sub_.elems[k];
        return nodal[sub_.tris[k][0]] * geo_->grad[e].col(0) +
               nodal[sub_.tris[k][1]] * geo_->grad[e].col(1) +
               nodal[sub_.tris[k][2]] * geo_->grad[e].col(2);
    }

    /// Maximum temperature over magnet-carrying elements (centroid rule).
    double max_magnet_temperature(const Vec& theta) const {
        double m = params_.theta0;
        for (size_t k = 0; k < sub_.elems.size(); ++k)
            if (c_e_[k] > 0.5) m = std::max(m, centroid_value(theta, static_cast<int>(k)));
        return m;
    }

    /// Boundary exchange integral sum_edges beta int (theta - theta_0) ds over
    /// both Robin circles (balance checks).
    double boundary_flux(const Vec& theta) const {
        double s = 0.0;
        auto add = [&](const std::string& name, double beta) {
            for (const auto& ed : sub_.edges.at(name)) {
                const double len =
                    (mesh_->nodes[sub_.nodes[ed[0]]] - mesh_->nodes[sub_.nodes[ed[1]]]).norm();
                s += beta * len * (0.5 * (theta[ed[0]] + theta[ed[1]]) - params_.theta0);
            }
        };
        add("gamma_sh", params_.beta_sh);
        add("gamma_r", params_.beta_ag);
        return s;
    }

    double magnet_fraction(int k, int which) const { return which == 0 ? frac_m1_[k] : frac_m2_[k]; }

private:
    Vec solve_reduced(const Vec& rhs_red) const {
        Vec x = fact_.solve(rhs_red);
        if (fact_.info() != Eigen::Success) throw SolveFailure("thermal: solve failed");
        if ((K_red_ * x - rhs_red).norm() > 1e-10 * std::max(1.0, rhs_red.norm()))
            throw SolveFailure("thermal: residual too large");
        return red_.expand(x);
    }

    const Mesh* mesh_;
    const P1Geometry* geo_;
    const DesignSpace* space_;
    ThermalParams params_;
    SubMesh sub_;
    Reducer red_;
    SpMat K_red_;
    Eigen::SimplicialLDLT<SpMat> fact_;
    Vec robin_rhs_;
    std::vector<double> lambda_e_, c_e_, frac_m1_, frac_m2_;
};

/// Eddy-current losses of the magnets from the periodic solution, and the
/// exact derivative machinery the coupled adjoint needs.
class EddyLossModel {
public:
    EddyLossModel(const ThermalSystem& thermal, const MagneticSystem& mag)
        : thermal_(&thermal), mag_(&mag) {
        const auto& sub = thermal.domain();
        const int ne = static_cast<int>(sub.elems.size());
        sigma1_.resize(ne);
        sigma2_.resize(ne);
        w1_.resize(ne);
        w2_.resize(ne);
        for (int k = 0; k < ne; ++k) {
            const double a = mag.geo().area[sub.elems[k]];
            w1_[k] = thermal.magnet_fraction(k, 0) * a;
            w2_[k] = thermal.magnet_fraction(k, 1) * a;
            sigma1_[k] = mag.bh().sigma_m * thermal.magnet_fraction(k, 0);
            sigma2_[k] = mag.bh().sigma_m * thermal.magnet_fraction(k, 1);
        }
        W1_ = std::accumulate(w1_.begin(), w1_.end(), 0.0);
        W2_ = std::accumulate(w2_.begin(), w2_.end(), 0.0);
        if (W1_ <= 0 || W2_ <= 0)
            std::cerr << "[rotopt] warning: empty magnet region, eddy losses vanish there\n";
        warn_if_disconnected();
    }

    /// Additive conductivity perturbation on one thermal-domain element,
    /// split across the magnet components by their fractions.
    void add_sigma(int k, double d) {
        const double f1 = thermal_->magnet_fraction(k, 0), f2 = thermal_->magnet_fraction(k, 1);
        const double tot = f1 + f2;
        if (tot <= 0) return;
        sigma1_[k] += d * f1 / tot;
        sigma2_[k] += d * f2 / tot;
    }

    LossField evaluate(const QuasistaticSolution& qs) const {
        const auto& sub = thermal_->domain();
        const int ne = static_cast<int>(sub.elems.size());
        const int N = qs.positions();
        LossField loss;
        loss.N = N;
        loss.tau = qs.schedule.tau();
        loss.P = Vec::Zero(ne);
        loss.D.resize(N);
        loss.mean.resize(N);
        for (int n = 0; n < N; ++n) {
            const Vec& u = qs.u_full[n];
            const Vec& up = qs.u_full[(n + N - 1) % N];
            Vec& D = loss.D[n];
            D.resize(ne);
            for (int k = 0; k < ne; ++k) {
                const auto& t = mag_->mesh().tris[sub.elems[k]];
                D[k] = ((u[t[0]] - up[t[0]]) + (u[t[1]] - up[t[1]]) + (u[t[2]] - up[t[2]])) / 3.0;
            }
            double m1 = 0.0, m2 = 0.0;
            for (int k = 0; k < ne; ++k) {
                m1 += w1_[k] * D[k];
                m2 += w2_[k] * D[k];
            }
            loss.mean[n] = {W1_ > 0 ? m1 / W1_ : 0.0, W2_ > 0 ? m2 / W2_ : 0.0};
            const double scale = 1.0 / (N * loss.tau * loss.tau);
            for (int k = 0; k < ne; ++k) {
                const double d1 = D[k] - loss.mean[n][0], d2 = D[k] - loss.mean[n][1];
                loss.P[k] += scale * (sigma1_[k] * d1 * d1 + sigma2_[k] * d2 * d2);
            }
        }
        return loss;
    }

    /// Loss density a pure material would see at element k (for the TD formula).
    double loss_of_material(const LossField& loss, int k, Material m) const {
        if (m != Material::Magnet1 && m != Material::Magnet2) return 0.0;
        const int which = (m == Material::Magnet1) ? 0 : 1;
        double p = 0.0;
        for (int n = 0; n < static_cast<int>(loss.D.size()); ++n) {
            const double d = loss.D[n][k] - loss.mean[n][which];
            p += d * d;
        }
        return mag_->bh().sigma_m * p / (loss.N * loss.tau * loss.tau);
    }

    /// Whole-machine average eddy loss power: pole integral x poles x length.
    double total(const LossField& loss) const {
        const auto& sub = thermal_->domain();
        double s = 0.0;
        for (size_t k = 0; k < sub.elems.size(); ++k)
            s += mag_->geo().area[sub.elems[k]] * loss.P[static_cast<int>(k)];
        return s * mag_->mesh().spec.pole_count() * mag_->mesh().spec.axial_length;
    }

    /// Exact derivative of S(u) = int P^ed(u) phi dx with respect to the nodal
    /// potentials, per position (full mesh numbering); phi is nodal on the
    /// thermal domain.
    std::vector<Vec> source_gradient(const QuasistaticSolution& qs, const LossField& loss,
                                     const Vec& phi) const {
        const auto& sub = thermal_->domain();
        const int ne = static_cast<int>(sub.elems.size());
        const int N = qs.positions();
        const double scale = 2.0 / (N * loss.tau * loss.tau);

        // dS/dD[n][k], with the mean correction applied to both factors
        std::vector<Vec> dS_dD(N, Vec::Zero(ne));
        for (int n = 0; n < N; ++n) {
            Vec g1(ne), g2(ne);
            double G1 = 0.0, G2 = 0.0;
            for (int k = 0; k < ne; ++k) {
                const double a = mag_->geo().area[sub.elems[k]];
                const double phibar = thermal_->centroid_value(phi, k);
                g1[k] = a * phibar * sigma1_[k] * (loss.D[n][k] - loss.mean[n][0]);
                g2[k] = a * phibar * sigma2_[k] * (loss.D[n][k] - loss.mean[n][1]);
                G1 += g1[k];
                G2 += g2[k];
            }
            for (int k = 0; k < ne; ++k) {
                double v = g1[k] + g2[k];
                if (W1_ > 0) v -= G1 * w1_[k] / W1_;
                if (W2_ > 0) v -= G2 * w2_[k] / W2_;
                dS_dD[n][k] = scale * v;
            }
        }

        // chain to nodal u^m: D^m += u^m/3, D^{m+1} -= u^m/3 (cyclic)
        std::vector<Vec> out(N, Vec::Zero(mag_->mesh().nodes.size()));
        for (int m = 0; m < N; ++m) {
            const int next = (m + 1) % N;
            for (int k = 0; k < ne; ++k) {
                const double v = (dS_dD[m][k] - dS_dD[next][k]) / 3.0;
                const auto& t = mag_->mesh().tris[sub.elems[k]];
                for (int i = 0; i < 3; ++i) out[m][t[i]] += v;
            }
        }
        return out;
    }

    /// Integral of the mean-corrected current over one magnet region (zero by
    /// construction; exposed for the conservation checks).
    double corrected_current_integral(const LossField& loss, int n, int which) const {
        const auto& sub = thermal_->domain();
        double s = 0.0;
        for (size_t k = 0; k < sub.elems.size(); ++k) {
            const double w = (which == 0 ? w1_ : w2_)[k];
            s += w * (loss.D[n][static_cast<int>(k)] - loss.mean[n][which]);
        }
        return s / loss.tau * mag_->bh().sigma_m;
    }

private:
    void warn_if_disconnected() const {
        // union-find over elements with a dominant magnet fraction
        const auto& sub = thermal_->domain();
        for (int which = 0; which < 2; ++which) {
            std::vector<int> ids;
            for (size_t k = 0; k < sub.elems.size(); ++k)
                if (thermal_->magnet_fraction(static_cast<int>(k), which) > 0.5)
                    ids.push_back(static_cast<int>(k));
            if (ids.size() < 2) continue;
            std::map<std::pair<int, int>, int> edge_owner;
            std::vector<int> parent(ids.size());
            std::iota(parent.begin(), parent.end(), 0);
            std::function<int(int)> find = [&](int x) {
                return parent[x] == x ? x : parent[x] = find(parent[x]);
            };
            auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
            for (size_t idx = 0; idx < ids.size(); ++idx) {
                const auto& t = sub.tris[ids[idx]];
                for (int i = 0; i < 3; ++i) {
                    const auto e = key(t[i], t[(i + 1) % 3]);
                    auto it = edge_owner.find(e);
                    if (it == edge_owner.end())
                        edge_owner[e] = static_cast<int>(idx);
                    else
                        parent[find(static_cast<int>(idx))] = find(it->second);
                }
            }
            int roots = 0;
            for (size_t idx = 0; idx < ids.size(); ++idx)
                if (find(static_cast<int>(idx)) == static_cast<int>(idx)) ++roots;
            if (roots > 1)
                std::cerr << "[rotopt] warning: magnet region " << which + 1 << " has " << roots
                          << " components; the loss average still treats it as one conductor\n";
        }
    }

    const ThermalSystem* thermal_;
    const MagneticSystem* mag_;
    std::vector<double> sigma1_, sigma2_, w1_, w2_;
    double W1_ = 0.0, W2_ = 0.0;
};

}  // namespace rotopt
