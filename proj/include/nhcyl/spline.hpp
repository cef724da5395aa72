#pragma once

#include <memory>

#include <Eigen/LU>

#include "nhcyl/types.hpp"

namespace nhc {

/**
 * Factored not-a-knot cubic spline system over a fixed knot vector. The
 * interpolation matrix depends only on the knots, so one LU factorization serves
 * every data channel fitted over the same grid (the graph solver fits one channel
 * per angle node per sweep).
 */
class SplineBasis {
public:
    explicit SplineBasis(std::vector<double> knots);

    int size() const { return static_cast<int>(x_.size()); }
    const std::vector<double>& knots() const { return x_; }

    /** Second derivatives m_i = s''(x_i) of the interpolant of y. */
    std::vector<double> second_derivatives(std::span<const double> y) const;

private:
    std::vector<double> x_;
    Eigen::PartialPivLU<Mat> lu_;  // empty for size < 4
};

class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::shared_ptr<const SplineBasis> basis, std::span<const double> y);

    bool valid() const { return basis_ != nullptr; }
    double eval(double x) const;
    double deriv(double x) const;
    /** s'(x_i); cheaper than deriv() and exact at the knot. */
    double deriv_at_node(int i) const;

    const std::shared_ptr<const SplineBasis>& basis() const { return basis_; }

private:
    int interval(double x) const;

    std::shared_ptr<const SplineBasis> basis_;
    std::vector<double> y_, m_;
};

/** One-off convenience; builds a fresh basis. */
CubicSpline make_spline(std::vector<double> knots, std::span<const double> y);

}  // namespace nhc
