#include "nhcyl/scaled.hpp"

#include <algorithm>

namespace nhc {

namespace {
void xy_rates(const Mat& L, const Mat& Li, const Mat& dL, const Mat& dLi, const Vec& P2t,
              const Vec& dP2t, double eps, const Vec& q2, const Vec& p2, double p1dot,
              const Vec& q2dot, const Vec& p2dot, Vec& xdot, Vec& ydot) {
    const Vec core = dL * (p1dot * (p2 - P2t)) + L * (p2dot - dP2t * p1dot);
    const Vec wing = eps * (dLi * (p1dot * q2) + Li * q2dot);
    xdot = core + wing;
    ydot = core - wing;
}
}  // namespace

void xy_time_derivatives(const ReductionData& red, double p1, double eps, const Vec& q2,
                         const Vec& p2, double p1dot, const Vec& q2dot, const Vec& p2dot,
                         Vec& xdot, Vec& ydot) {
    xy_rates(red.L(p1), red.Linv(p1), red.dL(p1), red.dLinv(p1), red.P2t(p1), red.dP2t(p1),
             eps, q2, p2, p1dot, q2dot, p2dot, xdot, ydot);
}

void xy_time_derivatives_node(const ReductionData& red, int k, double eps, const Vec& q2,
                              const Vec& p2, double p1dot, const Vec& q2dot,
                              const Vec& p2dot, Vec& xdot, Vec& ydot) {
    // Node values are knot-exact; the p1-derivatives come from the same splines the
    // off-node evaluations use, so on-grid and off-grid computations are one family.
    const double p1 = red.nodes()[k];
    xy_rates(red.L_node(k), red.Linv_node(k), red.dL(p1), red.dLinv(p1), red.P2t_node(k),
             red.dP2t(p1), eps, q2, p2, p1dot, q2dot, p2dot, xdot, ydot);
}

ScaledField::ScaledField(std::shared_ptr<const NormalFormH1> h1,
                         std::shared_ptr<const ReductionData> red, double eps)
    : h1_(std::move(h1)), red_(std::move(red)), eps_(eps), r_(red_->r()) {
    p_lo_ = red_->nodes().front();
    p_hi_ = red_->nodes().back();
}

void ScaledField::unpack(double tau, const Vec& s, double& t, Vec& q, Vec& p) const {
    t = tau / eps_;
    const double q1 = s[0] / (eps_ * red_->alpha());
    const double p1 = std::clamp(s[1], p_lo_, p_hi_);
    Vec q2(r_), p2(r_);
    red_->from_xy(p1, eps_, s.segment(2, r_), s.segment(2 + r_, r_), q2, p2);
    q.resize(1 + r_);
    p.resize(1 + r_);
    q[0] = q1;
    q.tail(r_) = q2;
    p[0] = p1;
    p.tail(r_) = p2;
}

Vec ScaledField::pack(double t, const Vec& q, const Vec& p) const {
    Vec s(dim());
    s[0] = eps_ * red_->alpha() * q[0];
    s[1] = p[0];
    Vec x(r_), y(r_);
    red_->to_xy(p[0], eps_, q.tail(r_), p.tail(r_), x, y);
    s.segment(2, r_) = x;
    s.segment(2 + r_, r_) = y;
    return s;
}

void ScaledField::eval(double tau, const Vec& s, Vec& ds) const {
    double t;
    Vec q, p;
    unpack(tau, s, t, q, p);
    const double p1 = p[0];

    Vec qdot, pdot;
    h1_->field(eps_, t, q, p, qdot, pdot);

    Vec xdot_t(r_), ydot_t(r_);
    xy_time_derivatives(*red_, p1, eps_, q.tail(r_), p.tail(r_), pdot[0],
                        qdot.tail(r_), pdot.tail(r_), xdot_t, ydot_t);

    ds.resize(dim());
    ds[0] = red_->alpha() * qdot[0];
    ds[1] = pdot[0] / eps_;
    ds.segment(2, r_) = xdot_t / eps_;
    ds.segment(2 + r_, r_) = ydot_t / eps_;
}

}  // namespace nhc
