#include "nhcyl/spline.hpp"

#include <algorithm>

namespace nhc {

SplineBasis::SplineBasis(std::vector<double> knots) : x_(std::move(knots)) {
    const int n = size();
    if (n < 2) throw ConfigError("spline: need at least two knots");
    for (int i = 0; i + 1 < n; ++i)
        if (!(x_[i + 1] > x_[i])) throw ConfigError("spline: knots must be strictly increasing");
    if (n < 4) return;  // closed forms below, no linear system

    Mat M = Mat::Zero(n, n);
    const auto h = [&](int i) { return x_[i + 1] - x_[i]; };
    // Third-derivative continuity at the second and second-to-last knots.
    M(0, 0) = h(1);
    M(0, 1) = -(h(0) + h(1));
    M(0, 2) = h(0);
    M(n - 1, n - 3) = h(n - 2);
    M(n - 1, n - 2) = -(h(n - 3) + h(n - 2));
    M(n - 1, n - 1) = h(n - 3);
    for (int i = 1; i + 1 < n; ++i) {
        M(i, i - 1) = h(i - 1);
        M(i, i) = 2.0 * (h(i - 1) + h(i));
        M(i, i + 1) = h(i);
    }
    lu_.compute(M);
}

std::vector<double> SplineBasis::second_derivatives(std::span<const double> y) const {
    const int n = size();
    if (static_cast<int>(y.size()) != n)
        throw ConfigError("spline: data length does not match the knot vector");
    if (n == 2) return {0.0, 0.0};
    if (n == 3) {
        // Single parabola through the three points: constant second derivative.
        const double d01 = (y[1] - y[0]) / (x_[1] - x_[0]);
        const double d12 = (y[2] - y[1]) / (x_[2] - x_[1]);
        const double m = 2.0 * (d12 - d01) / (x_[2] - x_[0]);
        return {m, m, m};
    }
    Vec rhs = Vec::Zero(n);
    for (int i = 1; i + 1 < n; ++i) {
        const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
        rhs[i] = 6.0 * ((y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl);
    }
    Vec m = lu_.solve(rhs);
    return std::vector<double>(m.data(), m.data() + n);
}

CubicSpline::CubicSpline(std::shared_ptr<const SplineBasis> basis, std::span<const double> y)
    : basis_(std::move(basis)), y_(y.begin(), y.end()) {
    m_ = basis_->second_derivatives(y_);
}

int CubicSpline::interval(double x) const {
    const auto& k = basis_->knots();
    const int n = static_cast<int>(k.size());
    auto it = std::upper_bound(k.begin(), k.end(), x);
    int i = static_cast<int>(it - k.begin()) - 1;
    return std::clamp(i, 0, n - 2);
}

double CubicSpline::eval(double x) const {
    const auto& k = basis_->knots();
    const int i = interval(x);
    const double h = k[i + 1] - k[i], t = x - k[i];
    const double b = (y_[i + 1] - y_[i]) / h - h * (2.0 * m_[i] + m_[i + 1]) / 6.0;
    return y_[i] + t * (b + t * (0.5 * m_[i] + t * (m_[i + 1] - m_[i]) / (6.0 * h)));
}

double CubicSpline::deriv(double x) const {
    const auto& k = basis_->knots();
    const int i = interval(x);
    const double h = k[i + 1] - k[i], t = x - k[i];
    const double b = (y_[i + 1] - y_[i]) / h - h * (2.0 * m_[i] + m_[i + 1]) / 6.0;
    return b + t * (m_[i] + 0.5 * t * (m_[i + 1] - m_[i]) / h);
}

double CubicSpline::deriv_at_node(int i) const {
    const auto& k = basis_->knots();
    const int n = static_cast<int>(k.size());
    if (i + 1 < n) {
        const double h = k[i + 1] - k[i];
        return (y_[i + 1] - y_[i]) / h - h * (2.0 * m_[i] + m_[i + 1]) / 6.0;
    }
    const double h = k[n - 1] - k[n - 2];
    return (y_[n - 1] - y_[n - 2]) / h + h * (2.0 * m_[n - 1] + m_[n - 2]) / 6.0;
}

CubicSpline make_spline(std::vector<double> knots, std::span<const double> y) {
    return CubicSpline(std::make_shared<SplineBasis>(std::move(knots)), y);
}

}  // namespace nhc
