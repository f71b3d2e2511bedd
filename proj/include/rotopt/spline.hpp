#pragma once

#include "rotopt/linalg.hpp"

#include <vector>

namespace rotopt {

/// Natural cubic spline through (x_i, y_i), x strictly increasing.
class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const int n = static_cast<int>(x_.size());
        if (n < 2 || y_.size() != x_.size()) throw InvalidInput("spline: need >= 2 matching knots");
        m_.assign(n, 0.0);
        if (n == 2) return;
        // Tridiagonal system for second derivatives, natural ends (m_0 = m_{n-1} = 0).
        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
        for (int i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            d[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
        }
        // Thomas algorithm on interior rows.
        for (int i = 2; i + 1 < n; ++i) {
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        for (int i = n - 2; i >= 1; --i) m_[i] = (d[i] - c[i] * (i + 2 < n ? m_[i + 1] : 0.0)) / b[i];
    }

    double operator()(double x) const {
        const int n = static_cast<int>(x_.size());
        int i = interval(x);
        const double h = x_[i + 1] - x_[i];
        const double t = (x - x_[i]) / h;
        const double s = 1.0 - t;
        (void)n;
        return s * y_[i] + t * y_[i + 1] +
               h * h / 6.0 * ((s * s * s - s) * m_[i] + (t * t * t - t) * m_[i + 1]);
    }

    const std::vector<double>& knots() const { return x_; }

private:
    int interval(double x) const {
        const int n = static_cast<int>(x_.size());
        if (x <= x_.front()) return 0;
        if (x >= x_[n - 2]) return n - 2;
        int lo = 0, hi = n - 2;
        while (lo < hi) {
            const int mid = (lo + hi + 1) / 2;
            if (x_[mid] <= x) lo = mid; else hi = mid - 1;
        }
        return lo;
    }

    std::vector<double> x_, y_, m_;
};

/// Periodic cubic spline on [0, period): samples y_i at x_i = i*period/n, wraps around.
class PeriodicCubicSpline {
public:
    PeriodicCubicSpline() = default;

    PeriodicCubicSpline(std::vector<double> y, double period) : y_(std::move(y)), period_(period) {
        const int n = static_cast<int>(y_.size());
        if (n < 3) throw InvalidInput("periodic spline: need >= 3 samples");
        h_ = period_ / n;
        // Cyclic tridiagonal system (constant spacing): (1/6) m_{i-1} + (2/3) m_i + (1/6) m_{i+1}
        //   = (y_{i+1} - 2 y_i + y_{i-1}) / h^2, indices mod n. Solved by Sherman-Morrison.
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        Vec d(n);
        for (int i = 0; i < n; ++i) {
            A(i, i) = 2.0 / 3.0;
            A(i, (i + 1) % n) = 1.0 / 6.0;
            A(i, (i + n - 1) % n) = 1.0 / 6.0;
            d(i) = (y_[(i + 1) % n] - 2.0 * y_[i] + y_[(i + n - 1) % n]) / (h_ * h_);
        }
        Vec m = A.partialPivLu().solve(d);  // n is small (table axes); dense is fine
        m_.assign(m.data(), m.data() + n);
    }

    double operator()(double x) const {
        const int n = static_cast<int>(y_.size());
        double xr = std::fmod(x, period_);
        if (xr < 0) xr += period_;
        int i = static_cast<int>(xr / h_);
        if (i >= n) i = n - 1;
        const int j = (i + 1) % n;
        const double t = (xr - i * h_) / h_;
        const double s = 1.0 - t;
        return s * y_[i] + t * y_[j] + h_ * h_ / 6.0 * ((s * s * s - s) * m_[i] + (t * t * t - t) * m_[j]);
    }

private:
    std::vector<double> y_, m_;
    double period_ = 2.0 * kPi, h_ = 0.0;
};

}  // namespace rotopt
