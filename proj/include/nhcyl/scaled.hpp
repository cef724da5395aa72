#pragma once

#include <memory>

#include "nhcyl/averaging.hpp"
#include "nhcyl/reduction.hpp"

namespace nhc {

/**
 * Time derivatives of the hyperbolic coordinates x = L(p2 - P2t) + eps L^{-1} q2 and
 * y = L(p2 - P2t) - eps L^{-1} q2 along a flow with the given phase derivatives,
 * including the dL/dp1 transport terms. p1 and its derivative are scalar (m = 1).
 */
void xy_time_derivatives(const ReductionData& red, double p1, double eps, const Vec& q2,
                         const Vec& p2, double p1dot, const Vec& q2dot, const Vec& p2dot,
                         Vec& xdot, Vec& ydot);

/** Same with the knot-exact matrices of node k (p1 = k-th knot). */
void xy_time_derivatives_node(const ReductionData& red, int k, double eps, const Vec& q2,
                              const Vec& p2, double p1dot, const Vec& q2dot,
                              const Vec& p2dot, Vec& xdot, Vec& ydot);

/**
 * The averaged system in slow time: state s = (theta, r, x, y) with theta = eps
 * alpha q1, r = p1, evolved in tau = eps t. The field is the exact pushforward of
 * the H1 field through the coordinate change (chain rule, no expansion dropped).
 * For the integrable core this reduces to (alpha Omega0(r), 0, D(r) x, -D(r) y).
 *
 * p1 is clamped to the momentum window for field evaluation; the graph is only
 * certified on the inner ball, and orbits may leave through the p1 boundary.
 */
class ScaledField {
public:
    ScaledField(std::shared_ptr<const NormalFormH1> h1, std::shared_ptr<const ReductionData> red,
                double eps);

    int dim() const { return 2 + 2 * r_; }
    int r() const { return r_; }
    double eps() const { return eps_; }
    double alpha() const { return red_->alpha(); }

    void eval(double tau, const Vec& s, Vec& ds) const;

    /** (t, q1, p1, q2, p2) of a scaled state (t enters through tau = eps t). */
    void unpack(double tau, const Vec& s, double& t, Vec& q, Vec& p) const;
    /** Scaled state from phase coordinates (inverse of unpack at tau = eps t). */
    Vec pack(double t, const Vec& q, const Vec& p) const;

private:
    std::shared_ptr<const NormalFormH1> h1_;
    std::shared_ptr<const ReductionData> red_;
    double eps_;
    int r_;
    double p_lo_, p_hi_;
};

}  // namespace nhc
