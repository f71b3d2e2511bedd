#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rotopt/levelset.hpp"
#include "rotopt/mesh.hpp"

#include <random>

using namespace rotopt;

TEST_CASE("simplex vertices: closed formula") {
    CHECK_THROWS_AS((void)simplex_vertices(1), InvalidInput);

    const auto b2 = simplex_vertices(2);
    CHECK(b2.vertices[0][0] == doctest::Approx(1.0));
    CHECK(b2.vertices[1][0] == doctest::Approx(-1.0));

    const auto b4 = simplex_vertices(4);
    CHECK(b4.vertices[0].isApprox(Eigen::Vector3d(1, 0, 0), 1e-14));
    CHECK(b4.vertices[1].isApprox(Eigen::Vector3d(-1.0 / 3, std::sqrt(8.0 / 9), 0), 1e-14));
    CHECK(b4.vertices[2].isApprox(
        Eigen::Vector3d(-1.0 / 3, -std::sqrt(2.0 / 9), std::sqrt(4.0 / 6)), 1e-14));
    CHECK(b4.vertices[3].isApprox(
        Eigen::Vector3d(-1.0 / 3, -std::sqrt(2.0 / 9), -std::sqrt(4.0 / 6)), 1e-14));

    for (int M = 2; M <= 8; ++M) {
        const auto b = simplex_vertices(M);
        for (int i = 0; i < M; ++i) {
            CHECK(b.vertices[i].norm() == doctest::Approx(1.0).epsilon(1e-13));
            for (int j = 0; j < M; ++j)
                if (i != j)
                    CHECK(b.vertices[i].dot(b.vertices[j]) ==
                          doctest::Approx(-1.0 / (M - 1)).epsilon(1e-12));
        }
        // N_i V_i has all positive entries.
        for (int i = 0; i < M; ++i)
            CHECK(((b.normals[i] * b.vertices[i]).array() > 0).all());
    }
}

TEST_CASE("material_at classification") {
    const auto b = simplex_vertices(4);
    CHECK(material_at(b.vertices[1], b) == 1);
    CHECK(material_at(Eigen::Vector3d::Zero(), b) == 0);  // full tie -> lowest index

    std::mt19937 rng(7);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 10000; ++trial) {
        Vec psi(3);
        for (int k = 0; k < 3; ++k) psi[k] = dist(rng);
        const int i = material_at(psi, b);
        CHECK(((b.normals[i] * psi).array() >= -1e-12).all());
        // invariance under positive scaling
        CHECK(material_at((3.7 * psi).eval(), b) == i);
    }
}

TEST_CASE("generalized_td identities") {
    const auto b = simplex_vertices(4);
    TDField td;
    td.d.resize(2, 3);
    td.material = {2, 1};
    const double c = 0.8;
    td.d.row(0) = (b.normals[2] * b.vertices[2] * c).transpose();
    td.d.row(1).setZero();
    const auto g = generalized_td(td, b);
    CHECK((g.row(0).transpose() - c * b.vertices[2]).norm() < 1e-13);
    CHECK(g.row(1).norm() == 0.0);
}

TEST_CASE("generalized_td reduces to the scalar two-material case") {
    const auto b = simplex_vertices(2);
    // Material 1 (index 0) with d^{1->2} J = t: g = N_1^{-1} t. N_1 = (V_1 - V_2)/2 = (1),
    // so g = t: positive t (changing away increases J) keeps psi in sector 1.
    TDField td;
    td.d.resize(1, 1);
    td.d(0, 0) = 2.5;
    td.material = {0};
    CHECK(generalized_td(td, b)(0, 0) == doctest::Approx(2.5));
    td.material = {1};
    CHECK(generalized_td(td, b)(0, 0) == doctest::Approx(-2.5));
}

TEST_CASE("optimality lemma consistency on random fields") {
    const auto b = simplex_vertices(4);
    std::mt19937 rng(13);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 200; ++trial) {
        Vec d(3);
        for (int k = 0; k < 3; ++k) d[k] = std::abs(dist(rng)) + 1e-6;  // strictly positive
        for (int i = 0; i < 4; ++i) {
            const Vec psi = b.normals_inv[i] * d;  // psi = c * N_i^{-1} d^i with c = 1
            CHECK(material_at(psi, b) == i);
        }
    }
}

static DesignSpace make_space(const Mesh& m, const P1Geometry& geo) { return make_design_space(m, geo); }

TEST_CASE("angle and slerp on the design space") {
    const Mesh m = build_pole_mesh(MachineSpec{}, 6e-3);
    const P1Geometry geo(m);
    const DesignSpace space = make_space(m, geo);
    const auto b = simplex_vertices(4);

    std::mt19937 rng(5);
    std::normal_distribution<double> dist;
    LevelSetField psi(space.node_count(), 3), g(space.node_count(), 3);
    for (int n = 0; n < space.node_count(); ++n)
        for (int k = 0; k < 3; ++k) {
            psi(n, k) = dist(rng);
            g(n, k) = dist(rng);
        }
    psi = normalized(space, psi);

    CHECK(*optimality_angle(space, psi, (2.0 * psi).eval()) == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(*optimality_angle(space, psi, (-1.0 * psi).eval()) == doctest::Approx(kPi));
    // orthogonalized g -> pi/2
    LevelSetField g_perp = g - space.inner(psi, g) * psi;
    CHECK(*optimality_angle(space, psi, g_perp) == doctest::Approx(kPi / 2).epsilon(1e-10));
    CHECK(!optimality_angle(space, psi, (0.0 * g).eval()).has_value());

    // endpoint behavior and norm preservation
    LevelSetField s1 = slerp_update(space, psi, g, 1.0);
    CHECK((s1 - normalized(space, g)).cwiseAbs().maxCoeff() < 1e-10);
    LevelSetField s0 = slerp_update(space, psi, g, 1e-9);
    CHECK((s0 - psi).cwiseAbs().maxCoeff() < 1e-6);
    for (double s : {0.1, 0.3, 0.7, 1.0}) {
        CHECK(space.norm(slerp_update(space, psi, g, s)) == doctest::Approx(1.0).epsilon(1e-12));
        // g = psi is a fixed point for every step size
        CHECK((slerp_update(space, psi, psi, s) - psi).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS((void)slerp_update(space, psi, (-psi).eval(), 0.5), InvalidInput);
}

TEST_CASE("cut fractions of a single triangle") {
    const auto b2 = simplex_vertices(2);
    // constant field inside sector 1 -> uncut
    Vec v1(1), v0(1);
    v1[0] = 1.0;
    v0[0] = -1.0;
    auto f = cut_fractions_triangle(v1, v1, v1, b2, 4);
    CHECK(f[0] == doctest::Approx(1.0));
    CHECK(f[1] == doctest::Approx(0.0));

    // linear crossing at edge midpoints: 25% around the negative vertex
    f = cut_fractions_triangle(v0, v1, v1, b2, 4);
    CHECK(f[1] == doctest::Approx(0.25).epsilon(std::pow(4.0, -4)));
    CHECK(f[0] == doctest::Approx(0.75).epsilon(std::pow(4.0, -4)));
    CHECK(f.sum() == doctest::Approx(1.0).epsilon(1e-14));

    // deeper subdivision tightens the estimate
    auto f6 = cut_fractions_triangle(v0, v1, v1, b2, 6);
    CHECK(std::abs(f6[1] - 0.25) <= std::abs(f[1] - 0.25) + 1e-12);
}

TEST_CASE("cut ratios on the design region sum to one") {
    const Mesh m = build_pole_mesh(MachineSpec{}, 6e-3);
    const P1Geometry geo(m);
    const DesignSpace space = make_space(m, geo);
    const auto b = simplex_vertices(4);

    std::mt19937 rng(11);
    std::normal_distribution<double> dist;
    LevelSetField psi(space.node_count(), 3);
    for (int n = 0; n < space.node_count(); ++n)
        for (int k = 0; k < 3; ++k) psi(n, k) = dist(rng);
    psi = normalized(space, psi);

    const MaterialConfig cfg = cut_ratios(psi, space, b);
    for (int k = 0; k < space.elem_count(); ++k) {
        CHECK(cfg.frac.col(k).sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((cfg.frac.col(k) >= 0).all());
        CHECK((cfg.frac.col(k) <= 1.0 + 1e-15).all());
    }
}
