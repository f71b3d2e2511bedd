#pragma once

#include "rotopt/linalg.hpp"

#include <vector>

namespace rotopt {

/// Linear constraint elimination u_full = P u_red for Dirichlet and
/// master/slave ties (scalar sign flips or small weighted combinations).
class Reducer {
public:
    explicit Reducer(int n_full) : state_(n_full, Free), ties_(n_full) {}

    void set_dirichlet(int i) {
        state_[i] = Dirichlet;
        ties_[i].clear();
    }

    /// Ties index `slave` to a combination of master indices.
    void set_tie(int slave, const std::vector<std::pair<int, double>>& masters) {
        if (state_[slave] == Dirichlet) return;  // already fixed to zero
        state_[slave] = Tied;
        ties_[slave] = masters;
    }

    /// Assigns dofs and builds the prolongation. Masters fixed by Dirichlet
    /// zero out the corresponding tie entries.
    void finalize() {
        const int n = static_cast<int>(state_.size());
        dof_.assign(n, -1);
        n_red_ = 0;
        for (int i = 0; i < n; ++i)
            if (state_[i] == Free) dof_[i] = n_red_++;
        std::vector<Triplet> trip;
        for (int i = 0; i < n; ++i) {
            if (state_[i] == Free) {
                trip.emplace_back(i, dof_[i], 1.0);
            } else if (state_[i] == Tied) {
                for (const auto& [m, w] : ties_[i]) {
                    if (state_[m] == Dirichlet) continue;
                    if (state_[m] != Free) throw InvalidInput("reducer: chained ties unsupported");
                    trip.emplace_back(i, dof_[m], w);
                }
            }
        }
        P_.resize(n, n_red_);
        P_.setFromTriplets(trip.begin(), trip.end());
        Pt_ = P_.transpose();
    }

    int n_full() const { return static_cast<int>(state_.size()); }
    int n_reduced() const { return n_red_; }
    const SpMat& P() const { return P_; }

    Vec reduce(const Vec& full) const { return Pt_ * full; }
    Vec expand(const Vec& red) const { return P_ * red; }
    SpMat reduce(const SpMat& K) const { return Pt_ * K * P_; }

    int dof_of(int i) const { return dof_[i]; }

private:
    enum State { Free, Dirichlet, Tied };
    std::vector<State> state_;
    std::vector<std::vector<std::pair<int, double>>> ties_;
    std::vector<int> dof_;
    int n_red_ = 0;
    SpMat P_, Pt_;
};

}  // namespace rotopt
