#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rotopt/smoothing.hpp"

#include <random>

using namespace rotopt;

namespace {
struct Fixture {
    Mesh mesh = build_pole_mesh(MachineSpec{}, 6e-3);
    P1Geometry geo{mesh};
    DesignSpace space = make_design_space(mesh, geo);
};
}  // namespace

TEST_CASE("constant field is a fixed point") {
    Fixture f;
    ScreenedPoissonSmoother sm(f.space, 1e-6);
    Eigen::MatrixXd c = Eigen::MatrixXd::Constant(f.space.node_count(), 2, 3.25);
    CHECK((sm.apply(c) - c).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("rho to zero recovers the input monotonically") {
    Fixture f;
    std::mt19937 rng(2);
    std::normal_distribution<double> dist;
    Eigen::MatrixXd g(f.space.node_count(), 1);
    for (int n = 0; n < f.space.node_count(); ++n) g(n, 0) = dist(rng);

    double last = 1e300;
    for (double rho : {1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
        ScreenedPoissonSmoother sm(f.space, rho);
        const double dist_l2 = f.space.norm(sm.apply(g) - g);
        CHECK(dist_l2 < last);
        last = dist_l2;
    }
    CHECK(last < 0.05 * f.space.norm(g));
}

TEST_CASE("high frequency input is damped") {
    Fixture f;
    std::mt19937 rng(9);
    std::uniform_int_distribution<int> coin(0, 1);
    Eigen::MatrixXd g(f.space.node_count(), 1);
    for (int n = 0; n < f.space.node_count(); ++n) g(n, 0) = coin(rng) ? 1.0 : -1.0;
    ScreenedPoissonSmoother sm(f.space, 1e-5);
    CHECK(f.space.norm(sm.apply(g)) < f.space.norm(g));
}

TEST_CASE("linearity") {
    Fixture f;
    std::mt19937 rng(4);
    std::normal_distribution<double> dist;
    Eigen::MatrixXd a(f.space.node_count(), 1), b(f.space.node_count(), 1);
    for (int n = 0; n < f.space.node_count(); ++n) {
        a(n, 0) = dist(rng);
        b(n, 0) = dist(rng);
    }
    ScreenedPoissonSmoother sm(f.space, 1e-6);
    Eigen::MatrixXd lhs = sm.apply(2.0 * a - 0.5 * b);
    Eigen::MatrixXd rhs = 2.0 * sm.apply(a) - 0.5 * sm.apply(b);
    CHECK(f.space.norm(lhs - rhs) <= 1e-12 * std::max(1.0, f.space.norm(lhs)));
}

TEST_CASE("invalid rho rejected") {
    Fixture f;
    CHECK_THROWS_AS(ScreenedPoissonSmoother(f.space, 0.0), InvalidInput);
}
