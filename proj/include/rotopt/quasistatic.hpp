#pragma once

#include "rotopt/magnetostatics.hpp"

namespace rotopt {

/// Equidistant rotor positions over one rotor-field period T = T_full/6
/// (a mechanical rotation of 15 degrees for the reference machine).
struct RotorSchedule {
    int N = 8;
    double speed_rpm = 16000.0;
    int pole_pairs = 4;

    double period() const { return 60.0 / (pole_pairs * speed_rpm * 6.0); }
    double tau() const { return period() / N; }
    double period_angle() const { return 2.0 * kPi / (6.0 * pole_pairs); }
    double alpha(int n) const { return period_angle() * n / N; }
    double omega() const { return speed_rpm * 2.0 * kPi / 60.0; }
};

struct QuasistaticSolution {
    std::vector<Vec> u_red, lambda, u_full;
    RotorSchedule schedule;
    int newton_iters = 0;

    int positions() const { return static_cast<int>(u_red.size()); }
};

namespace detail {

/// Block-cyclic Newton matrix of the all-in-one time-periodic system:
/// diagonal blocks [A'_n + M/tau, B_n^T; B_n, 0], sub-diagonal (cyclic) -M/tau.
inline SpMat allinone_matrix(const MagneticSystem& sys, const std::vector<Vec>& u_full,
                             const std::vector<SpMat>& B, const SpMat& M_over_tau) {
    const int N = static_cast<int>(u_full.size());
    const int n = sys.n_u(), K = sys.n_lambda(), blk = n + K;
    std::vector<Triplet> trip;
    for (int pos = 0; pos < N; ++pos) {
        const int off = pos * blk;
        const SpMat A = sys.assemble_dA(u_full[pos]);
        for (int c = 0; c < A.outerSize(); ++c)
            for (SpMat::InnerIterator it(A, c); it; ++it)
                trip.emplace_back(off + it.row(), off + it.col(), it.value());
        for (int c = 0; c < B[pos].outerSize(); ++c)
            for (SpMat::InnerIterator it(B[pos], c); it; ++it) {
                trip.emplace_back(off + n + it.row(), off + it.col(), it.value());
                trip.emplace_back(off + it.col(), off + n + it.row(), it.value());
            }
        if (N > 1) {
            const int prev = ((pos + N - 1) % N) * blk;
            for (int c = 0; c < M_over_tau.outerSize(); ++c)
                for (SpMat::InnerIterator it(M_over_tau, c); it; ++it) {
                    trip.emplace_back(off + it.row(), off + it.col(), it.value());
                    trip.emplace_back(off + it.row(), prev + it.col(), -it.value());
                }
        }
    }
    SpMat J(N * blk, N * blk);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
}

}  // namespace detail

/// All-in-one Newton solve of the time-discrete periodic magnetoquasistatic
/// system. Per-position magnetostatic solutions seed the iteration.
inline QuasistaticSolution solve_quasistatic_periodic(const MagneticSystem& sys,
                                                      const RotorSchedule& schedule,
                                                      double tol = 1e-8, int max_iters = 30) {
    const int N = schedule.N;
    if (N < 1) throw InvalidInput("quasistatic: need at least one position");
    const int n = sys.n_u(), K = sys.n_lambda(), blk = n + K;

    QuasistaticSolution qs;
    qs.schedule = schedule;
    qs.u_red.resize(N);
    qs.lambda.resize(N);
    qs.u_full.resize(N);

    std::vector<SpMat> B(N);
    std::vector<Vec> j_red(N);
    StaticSolution warm;
    for (int pos = 0; pos < N; ++pos) {
        const double a = schedule.alpha(pos);
        StaticSolution s = solve_magnetostatic_robust(sys, a, a, pos ? &warm : nullptr, tol);
        warm = s;
        qs.u_red[pos] = s.u_red;
        qs.lambda[pos] = s.lambda;
        B[pos] = sys.B_of(a);
        j_red[pos] = sys.reducer().reduce(sys.assemble_j(a));
    }

    const SpMat M_over_tau = sys.assemble_sigma_mass() / schedule.tau();
    const bool has_sigma = M_over_tau.nonZeros() > 0;

    auto residual = [&](const std::vector<Vec>& u, const std::vector<Vec>& lam) {
        Vec r(N * blk);
        for (int pos = 0; pos < N; ++pos) {
            const int prev = (pos + N - 1) % N;
            Vec ru = sys.reducer().reduce(sys.assemble_A(sys.reducer().expand(u[pos]))) -
                     j_red[pos] + B[pos].transpose() * lam[pos];
            if (has_sigma && N > 1) ru += M_over_tau * (u[pos] - u[prev]);
            r.segment(pos * blk, n) = ru;
            r.segment(pos * blk + n, K) = B[pos] * u[pos];
        }
        return r;
    };

    double base = 0.0;
    {
        const Vec a0 = sys.reducer().reduce(sys.assemble_A(Vec::Zero(sys.reducer().n_full())));
        for (int pos = 0; pos < N; ++pos) base += (a0 - j_red[pos]).squaredNorm();
        base = std::max(std::sqrt(base), 1e-300);
    }

    Vec r = residual(qs.u_red, qs.lambda);
    for (int it = 0; it < max_iters; ++it) {
        if (r.norm() <= tol * base) {
            qs.newton_iters = it;
            for (int pos = 0; pos < N; ++pos) qs.u_full[pos] = sys.reducer().expand(qs.u_red[pos]);
            return qs;
        }
        std::vector<Vec> u_full(N);
        for (int pos = 0; pos < N; ++pos) u_full[pos] = sys.reducer().expand(qs.u_red[pos]);
        const SpMat J = detail::allinone_matrix(sys, u_full, B, has_sigma ? M_over_tau : SpMat(n, n));
        Eigen::SparseLU<SpMat> lu(J);
        if (lu.info() != Eigen::Success) throw SolveFailure("quasistatic: singular all-in-one matrix");
        const Vec d = lu.solve(-r);

        double s = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= 10; ++halving) {
            std::vector<Vec> u_try(N), l_try(N);
            for (int pos = 0; pos < N; ++pos) {
                u_try[pos] = qs.u_red[pos] + s * d.segment(pos * blk, n);
                l_try[pos] = qs.lambda[pos] + s * d.segment(pos * blk + n, K);
            }
            Vec r_try = residual(u_try, l_try);
            if (r_try.norm() < r.norm() || r_try.norm() <= tol * base) {
                qs.u_red = u_try;
                qs.lambda = l_try;
                r = r_try;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) {
            if (r.norm() <= 1e-8 * base) {
                qs.newton_iters = it + 1;
                for (int pos = 0; pos < N; ++pos)
                    qs.u_full[pos] = sys.reducer().expand(qs.u_red[pos]);
                return qs;
            }
            throw SolveFailure("quasistatic: line search stalled, residual " +
                               std::to_string(r.norm() / base));
        }
    }
    throw SolveFailure("quasistatic: Newton did not converge");
}

/// Arithmetic mean of the whole-machine torque over the schedule.
inline double average_torque(const MagneticSystem& sys, const QuasistaticSolution& qs) {
    double t = 0.0;
    for (int pos = 0; pos < qs.positions(); ++pos)
        t += sys.torque(qs.u_red[pos], qs.lambda[pos], qs.schedule.alpha(pos));
    return t / qs.positions();
}

/// Single linear solve with the transposed all-in-one Newton matrix at the
/// converged states; rhs and result are stacked per position as (u, lambda).
inline Vec solve_adjoint_quasistatic(const MagneticSystem& sys, const QuasistaticSolution& qs,
                                     const Vec& rhs) {
    const int N = qs.positions();
    const int n = sys.n_u(), K = sys.n_lambda();
    std::vector<SpMat> B(N);
    for (int pos = 0; pos < N; ++pos) B[pos] = sys.B_of(qs.schedule.alpha(pos));
    const SpMat M_over_tau = sys.assemble_sigma_mass() / qs.schedule.tau();
    const SpMat J = detail::allinone_matrix(sys, qs.u_full, B,
                                            M_over_tau.nonZeros() ? M_over_tau : SpMat(n, n));
    const SpMat Jt = J.transpose();
    Eigen::SparseLU<SpMat> lu(Jt);
    if (lu.info() != Eigen::Success) throw SolveFailure("quasistatic adjoint: singular system");
    const Vec x = lu.solve(rhs);
    if ((Jt * x - rhs).norm() > 1e-10 * std::max(1.0, rhs.norm()))
        throw SolveFailure("quasistatic adjoint: residual too large");
    (void)K;
    return x;
}

}  // namespace rotopt
