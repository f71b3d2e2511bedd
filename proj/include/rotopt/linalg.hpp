#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rotopt {

using Vec = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kPi = std::numbers::pi;

/// Unit vector e_phi = (cos phi, sin phi).
inline Vec2 unit_vector(double phi) { return {std::cos(phi), std::sin(phi)}; }

/// Rotation matrix R_phi = (e_phi, e_{phi+pi/2}).
inline Mat2 rotation(double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    Mat2 r;
    r << c, -s, s, c;
    return r;
}

/// Scalar-to-vector curl of a P1 function: curl(v) = (d_y v, -d_x v) = R_{-pi/2} grad v.
inline Vec2 curl_from_grad(const Vec2& g) { return {g.y(), -g.x()}; }

struct SolveFailure : std::runtime_error {
    explicit SolveFailure(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidInput : std::runtime_error {
    explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

inline int sgn(double x) { return (x > 0.0) - (x < 0.0); }

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace rotopt
