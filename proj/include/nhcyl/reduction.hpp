#pragma once

#include "nhcyl/model.hpp"
#include "nhcyl/spd.hpp"
#include "nhcyl/spline.hpp"

namespace nhc {

/** Matrix-valued function of scalar p1, cubic-splined entrywise over shared knots. */
class MatrixFamily {
public:
    MatrixFamily() = default;
    MatrixFamily(std::shared_ptr<const SplineBasis> basis, std::vector<Mat> node_values);

    Mat value(double p1) const;
    Mat derivative(double p1) const;
    const Mat& node(int k) const { return nodes_[k]; }
    Mat derivative_node(int k) const;

private:
    int rows_ = 0, cols_ = 0;
    std::shared_ptr<const SplineBasis> basis_;
    std::vector<CubicSpline> entries_;  // row-major
    std::vector<Mat> nodes_;
};

/**
 * Everything the hyperbolic reduction needs along the momentum window, evaluated at
 * the spline knots and interpolated between them: the scaling L(p1) solving
 * L^2 A L^2 = B(p1), its inverse, the rate matrix D = L A L, the resonant sheet
 * P2(p1) with derivative, and the fast frequency Omega0(p1). The solver and every
 * certificate use the same splined families, so the scaled-coordinate conjugacy is
 * applied consistently everywhere.
 *
 * Restricted to one fast angle (m = 1): p1 is scalar. The linear algebra itself is
 * dimension-agnostic (see spd.hpp), but the graph machinery keys its momentum axis
 * on a scalar.
 */
class ReductionData {
public:
    ReductionData(const AveragedData& avg, std::vector<double> p1_nodes);

    int r() const { return r_; }
    const std::shared_ptr<const SplineBasis>& basis() const { return basis_; }
    const std::vector<double>& nodes() const { return basis_->knots(); }

    Mat L(double p1) const { return L_.value(p1); }
    Mat Linv(double p1) const { return Linv_.value(p1); }
    Mat D(double p1) const { return D_.value(p1); }
    Mat dL(double p1) const { return L_.derivative(p1); }
    Mat dLinv(double p1) const { return Linv_.derivative(p1); }
    Vec P2t(double p1) const { return P2_.value(p1).col(0); }
    Vec dP2t(double p1) const { return P2_.derivative(p1).col(0); }
    double Omega(double p1) const { return Om_.value(p1)(0, 0); }
    double dOmega(double p1) const { return Om_.derivative(p1)(0, 0); }

    const Mat& L_node(int k) const { return L_.node(k); }
    const Mat& Linv_node(int k) const { return Linv_.node(k); }
    const Mat& D_node(int k) const { return D_.node(k); }
    Vec P2t_node(int k) const { return P2_.node(k).col(0); }
    double Omega_node(int k) const { return Om_.node(k)(0, 0); }

    /** Forward scaled change at arbitrary p1 (splined families). */
    void to_xy(double p1, double eps, const Vec& q2, const Vec& p2, Vec& x, Vec& y) const;
    void from_xy(double p1, double eps, const Vec& x, const Vec& y, Vec& q2, Vec& p2) const;
    /** Same change with the exact node matrices (used on the solver grid). */
    void to_xy_node(int k, double eps, const Vec& q2, const Vec& p2, Vec& x, Vec& y) const;
    void from_xy_node(int k, double eps, const Vec& x, const Vec& y, Vec& q2, Vec& p2) const;

    /** Normal expansion rate: min eigenvalue of D over the window. */
    double a() const { return a_; }
    /** max |dOmega0/dp1| over the window. */
    double dOmega_norm() const { return dOm_norm_; }
    /** Fast-angle scaling, min(0.5, 0.5 a / |dOmega0|): keeps the slow C1 bound under a. */
    double alpha() const { return alpha_; }
    /** A priori C1 bound of the slow field, alpha * |dOmega0|. */
    double b_bound() const { return b_; }
    /** Worst defining-equation residual |L^2 A L^2 - B| over the nodes. */
    double eq_residual() const { return eq_residual_; }

private:
    int r_ = 0;
    std::shared_ptr<const SplineBasis> basis_;
    MatrixFamily L_, Linv_, D_, P2_, Om_;
    double a_ = 0.0, dOm_norm_ = 0.0, alpha_ = 0.0, b_ = 0.0, eq_residual_ = 0.0;
};

/** Certificate wrapper around linear_block_check for a single (A, B) pair. */
CertificateReport linear_block_certificate(const Mat& A, const Mat& B, double tol = 1e-10);

}  // namespace nhc
