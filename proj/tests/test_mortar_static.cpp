#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"

#include "rotopt/quasistatic.hpp"

using namespace rotopt;
using testing::Rig;

TEST_CASE("zero excitation gives the zero solution") {
    Rig rig(7e-3);
    BHLawSet bh;
    SourceParams src;
    src.j_hat = 0.0;
    const MaterialConfig cfg = rig.uniform(Material::Iron);  // no magnets
    MagneticSystem sys(rig.mesh, rig.geo, rig.space, cfg, bh, src, 8);
    const StaticSolution s = solve_magnetostatic(sys, 0.1, 0.1);
    CHECK(s.u_red.norm() == 0.0);
    CHECK(s.lambda.norm() == 0.0);
    CHECK(s.newton_iters == 0);
    CHECK(sys.torque(s.u_red, s.lambda, 0.1) == 0.0);
}

TEST_CASE("linear materials converge in one Newton step") {
    Rig rig(7e-3);
    BHLawSet bh;
    bh.nu_f = bh.nu0;  // iron law collapses to nu0 * b: fully linear problem
    SourceParams src;
    MagneticSystem sys(rig.mesh, rig.geo, rig.space, rig.uniform(Material::Air), bh, src, 8);
    const StaticSolution s = solve_magnetostatic(sys, 0.0, 0.0);
    CHECK(s.newton_iters == 1);
    CHECK(s.u_red.norm() > 0.0);
}

TEST_CASE("mortar jump vanishes after the solve") {
    Rig rig(6e-3);
    MagneticSystem sys(rig.mesh, rig.geo, rig.space, rig.uniform(Material::Iron), BHLawSet{},
                       SourceParams{}, 8);
    const double a = 0.07;
    const StaticSolution s = solve_magnetostatic(sys, a, a);
    CHECK(sys.mortar_jump(s.u_red, a).norm() <=
          1e-8 * std::max(1.0, s.u_red.norm() * sys.mortar().r_gamma));
}

TEST_CASE("reference design: air gap flux density in the physical band") {
    Rig rig(4e-3);
    const LevelSetField psi = rig.reference_design();
    const MaterialConfig cfg = cut_ratios(psi, rig.space, rig.basis);
    MagneticSystem sys(rig.mesh, rig.geo, rig.space, cfg, BHLawSet{}, SourceParams{}, 8);
    const StaticSolution s = solve_magnetostatic(sys, 0.0, 0.0);
    double brms = 0.0, area = 0.0, bmax = 0.0;
    for (size_t e = 0; e < rig.mesh.tris.size(); ++e)
        if (rig.mesh.region[e] == Region::AirGapRotor ||
            rig.mesh.region[e] == Region::AirGapStator) {
            const double b = sys.curl_of(s.u_full, static_cast<int>(e)).norm();
            brms += rig.geo.area[e] * b * b;
            area += rig.geo.area[e];
            bmax = std::max(bmax, b);
        }
    // golden sanity band for the working field level; local tooth-corner
    // spikes may exceed it, so the band is checked on the gap RMS
    CHECK(std::sqrt(brms / area) > 0.5);
    CHECK(std::sqrt(brms / area) < 1.5);
    CHECK(bmax < 2.6);
}

TEST_CASE("torque identities") {
    Rig rig(6e-3);
    const MaterialConfig cfg = cut_ratios(rig.reference_design(), rig.space, rig.basis);
    MagneticSystem sys(rig.mesh, rig.geo, rig.space, cfg, BHLawSet{}, SourceParams{}, 8);
    const double a = 0.05;
    const StaticSolution s = solve_magnetostatic(sys, a, a);

    CHECK(sys.torque(s.u_red, Vec::Zero(sys.n_lambda()), a) == 0.0);
    // even degree: negating both states leaves the torque unchanged
    CHECK(sys.torque((-s.u_red).eval(), (-s.lambda).eval(), a) ==
          doctest::Approx(sys.torque(s.u_red, s.lambda, a)).epsilon(1e-12));

    // gradients are consistent with the bilinear value
    CHECK(s.u_red.dot(sys.torque_grad_u(s.lambda, a)) ==
          doctest::Approx(sys.torque(s.u_red, s.lambda, a)).epsilon(1e-10));
    CHECK(s.lambda.dot(sys.torque_grad_lambda(s.u_red, a)) ==
          doctest::Approx(sys.torque(s.u_red, s.lambda, a)).epsilon(1e-10));
}

TEST_CASE("rotation consistency for a rotationally symmetric rotor") {
    Rig rig(5e-3);
    MagneticSystem sys(rig.mesh, rig.geo, rig.space, rig.uniform(Material::Iron), BHLawSet{},
                       SourceParams{}, 8);
    const double a_src = 0.03;
    const StaticSolution s0 = solve_magnetostatic(sys, 0.0, a_src);
    const StaticSolution s1 = solve_magnetostatic(sys, 0.021, a_src);
    // stator-frame fields agree when the rotor is featureless
    double num = 0.0, den = 0.0;
    for (size_t n = rig.mesh.rotor_node_count; n < rig.mesh.nodes.size(); ++n) {
        num += std::pow(s0.u_full[n] - s1.u_full[n], 2);
        den += std::pow(s0.u_full[n], 2);
    }
    CHECK(std::sqrt(num / den) < 1e-6);
    // and the symmetric rotor produces no torque (scale: hundreds of N m for this machine)
    CHECK(std::abs(sys.torque(s1.u_red, s1.lambda, 0.021)) < 1e-3);
}

TEST_CASE("adjoint duality identity for linear materials") {
    Rig rig(7e-3);
    BHLawSet bh;
    bh.nu_f = bh.nu0;
    MagneticSystem sys(rig.mesh, rig.geo, rig.space, rig.uniform(Material::Air), bh,
                       SourceParams{}, 8);
    const double a = 0.04;
    const StaticSolution s = solve_magnetostatic(sys, a, a, nullptr, 1e-12);

    // forcing of the linear system: [j; 0]
    const Vec j_red = sys.reducer().reduce(sys.assemble_j(a));
    Vec rhs_u = sys.torque_grad_u(s.lambda, a);
    Vec rhs_l = sys.torque_grad_lambda(s.u_red, a);
    const auto [p, eta] = solve_adjoint_static(sys, s, rhs_u, rhs_l);

    const double lhs = rhs_u.dot(s.u_red) + rhs_l.dot(s.lambda);
    const double rhs_val = j_red.dot(p);
    CHECK(lhs == doctest::Approx(rhs_val).epsilon(1e-10));
}

TEST_CASE("adjoint gradient of average torque vs finite differences") {
    Rig rig(8e-3);
    const MaterialConfig cfg = cut_ratios(rig.reference_design(), rig.space, rig.basis);
    MagneticSystem sys(rig.mesh, rig.geo, rig.space, cfg, BHLawSet{}, SourceParams{}, 8);

    RotorSchedule sched;
    sched.N = 3;
    sched.pole_pairs = rig.spec.pole_pairs;

    // probe the most magnet-dominant element; the linear law keeps the
    // perturbed problem positive definite for the chosen step size
    int probe = -1;
    double best = -1.0;
    for (int k = 0; k < rig.space.elem_count(); ++k) {
        const double f = cfg.frac(static_cast<int>(Material::Magnet1), k);
        if (f > best) {
            best = f;
            probe = rig.space.sub.elems[k];
        }
    }
    REQUIRE(best > 0.3);

    auto avg_torque = [&](MagneticSystem& s) {
        double t = 0.0;
        StaticSolution warm;
        for (int n = 0; n < sched.N; ++n) {
            const double a = sched.alpha(n);
            StaticSolution sol = solve_magnetostatic(s, a, a, n ? &warm : nullptr, 1e-12);
            warm = sol;
            t += s.torque(sol.u_red, sol.lambda, a);
        }
        return t / sched.N;
    };

    // Adjoint directional derivative. With the adjoint of the cost -avgT
    // (rhs +grad T / N as in the adjoint equation), d(-avgT)/dnu_e =
    // sum_n area_e (curl u . curl p), so the average torque gets a minus.
    double dJ = 0.0;
    {
        StaticSolution warm;
        for (int n = 0; n < sched.N; ++n) {
            const double a = sched.alpha(n);
            StaticSolution sol = solve_magnetostatic(sys, a, a, n ? &warm : nullptr, 1e-12);
            warm = sol;
            const auto [p, eta] = solve_adjoint_static(
                sys, sol, (sys.torque_grad_u(sol.lambda, a) / sched.N).eval(),
                (sys.torque_grad_lambda(sol.u_red, a) / sched.N).eval());
            const Vec p_full = sys.reducer().expand(p);
            dJ -= rig.geo.area[probe] *
                  sys.curl_of(sol.u_full, probe).dot(sys.curl_of(p_full, probe));
        }
    }

    const double dn = 1e-2 * BHLawSet{}.nu0;
    MagneticSystem sp(rig.mesh, rig.geo, rig.space, cfg, BHLawSet{}, SourceParams{}, 8);
    sp.add_nu(probe, dn);
    MagneticSystem sm(rig.mesh, rig.geo, rig.space, cfg, BHLawSet{}, SourceParams{}, 8);
    sm.add_nu(probe, -dn);
    const double fd = (avg_torque(sp) - avg_torque(sm)) / (2 * dn);
    CHECK(std::abs(dJ - fd) <= 2e-3 * std::abs(fd));
}

TEST_CASE("quasistatic: zero conductivity reduces to the static sequence") {
    Rig rig(7e-3);
    const MaterialConfig all_iron = rig.uniform(Material::Iron);  // sigma = 0 everywhere
    MagneticSystem sys(rig.mesh, rig.geo, rig.space, all_iron, BHLawSet{}, SourceParams{}, 8);
    RotorSchedule sched;
    sched.N = 3;
    const QuasistaticSolution qs = solve_quasistatic_periodic(sys, sched, 1e-11);
    StaticSolution warm;
    for (int n = 0; n < sched.N; ++n) {
        const double a = sched.alpha(n);
        StaticSolution s = solve_magnetostatic(sys, a, a, n ? &warm : nullptr, 1e-11);
        warm = s;
        CHECK((qs.u_red[n] - s.u_red).norm() <= 1e-9 * std::max(1.0, s.u_red.norm()));
    }
}

TEST_CASE("quasistatic: N = 1 degenerates to magnetostatics") {
    Rig rig(7e-3);
    const MaterialConfig cfg = cut_ratios(rig.reference_design(), rig.space, rig.basis);
    MagneticSystem sys(rig.mesh, rig.geo, rig.space, cfg, BHLawSet{}, SourceParams{}, 8);
    RotorSchedule sched;
    sched.N = 1;
    const QuasistaticSolution qs = solve_quasistatic_periodic(sys, sched, 1e-11);
    const StaticSolution s = solve_magnetostatic(sys, 0.0, 0.0, nullptr, 1e-11);
    CHECK((qs.u_red[0] - s.u_red).norm() <= 1e-9 * std::max(1.0, s.u_red.norm()));
}

TEST_CASE("all-in-one matrix has the block-cyclic sparsity") {
    Rig rig(8e-3);
    const MaterialConfig cfg = cut_ratios(rig.reference_design(), rig.space, rig.basis);
    MagneticSystem sys(rig.mesh, rig.geo, rig.space, cfg, BHLawSet{}, SourceParams{}, 8);
    RotorSchedule sched;
    sched.N = 4;
    const QuasistaticSolution qs = solve_quasistatic_periodic(sys, sched);

    std::vector<SpMat> B(sched.N);
    for (int n = 0; n < sched.N; ++n) B[n] = sys.B_of(sched.alpha(n));
    const SpMat J = detail::allinone_matrix(sys, qs.u_full, B,
                                            (sys.assemble_sigma_mass() / sched.tau()).eval());
    const int blk = sys.n_u() + sys.n_lambda();
    for (int c = 0; c < J.outerSize(); ++c)
        for (SpMat::InnerIterator it(J, c); it; ++it) {
            const int br = static_cast<int>(it.row()) / blk, bc = static_cast<int>(it.col()) / blk;
            const int diff = (br - bc + sched.N) % sched.N;
            CHECK((diff == 0 || diff == 1));
        }
}

TEST_CASE("quasistatic adjoint: transposition identity") {
    Rig rig(8e-3);
    const MaterialConfig cfg = cut_ratios(rig.reference_design(), rig.space, rig.basis);
    MagneticSystem sys(rig.mesh, rig.geo, rig.space, cfg, BHLawSet{}, SourceParams{}, 8);
    RotorSchedule sched;
    sched.N = 3;
    const QuasistaticSolution qs = solve_quasistatic_periodic(sys, sched);

    const int blk = sys.n_u() + sys.n_lambda();
    Vec rhs(sched.N * blk);
    for (int n = 0; n < sched.N; ++n) {
        rhs.segment(n * blk, sys.n_u()) = sys.torque_grad_u(qs.lambda[n], sched.alpha(n)) / sched.N;
        rhs.segment(n * blk + sys.n_u(), sys.n_lambda()) =
            sys.torque_grad_lambda(qs.u_red[n], sched.alpha(n)) / sched.N;
    }
    const Vec adj = solve_adjoint_quasistatic(sys, qs, rhs);
    std::vector<SpMat> B(sched.N);
    for (int n = 0; n < sched.N; ++n) B[n] = sys.B_of(sched.alpha(n));
    const SpMat J = detail::allinone_matrix(sys, qs.u_full, B,
                                            (sys.assemble_sigma_mass() / sched.tau()).eval());
    CHECK((SpMat(J.transpose()) * adj - rhs).norm() <= 1e-10 * rhs.norm());
}
