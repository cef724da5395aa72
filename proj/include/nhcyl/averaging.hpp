#pragma once

#include "nhcyl/model.hpp"

namespace nhc {

/**
 * Solution f of the first-order averaging equation
 *
 *   d_t f + (omega, 0) . d_q f = G(t, q, p0) - V(q2),
 *
 * solved mode by mode: each right-hand-side mode is divided by its divisor
 * 2 pi (k_t + k_q1 . omega), with the quarter-period phase shift of dividing a
 * trigonometric mode by a derivative. f keeps the truncation of G, so the residual
 * of the equation is exactly zero, not merely small.
 */
struct HomologicalSolution {
    FourierSeries f;  // on (t, q1, q2), zero mean on the resonant-null modes
    /** Smallest |k_t + k_q1.omega| among the solved modes. */
    double min_divisor = std::numeric_limits<double>::infinity();
    /** Largest amplitude found on modes whose divisor vanishes (should be ~0). */
    double resonant_residual = 0.0;
    std::size_t solved_modes = 0;
};

/**
 * Mode-wise solve. Modes with k_t = 0 and k_q1 = 0 belong to the average V and are
 * skipped. A vanishing divisor (|.| <= tol_divisor) on any other mode with amplitude
 * above tol_resonance means the declared resonance block does not cover the actual
 * resonances of omega; that is a configuration error.
 */
HomologicalSolution solve_homological(const HamiltonianSpec& spec,
                                      double tol_resonance = 1e-10,
                                      double tol_divisor = 1e-9);

/**
 * The momentum shear of the averaging step: (q, p) -> (q, p + eps^2 d_q f(t, q)),
 * extended to energy by e -> e + eps^2 d_t f(t, q). Exactly invertible by negating
 * eps2_sign.
 */
Vec apply_psi_momentum(const HomologicalSolution& hom, double eps, double t, const Vec& q,
                       const Vec& p, int eps2_sign = +1);
double apply_psi_energy(const HomologicalSolution& hom, double eps, double t, const Vec& q,
                        double e, int eps2_sign = +1);
/** Jacobian of (q, p) -> (q, p + eps^2 d_q f) at fixed t (unit lower-triangular blocks). */
Mat psi_jacobian(const HomologicalSolution& hom, double eps, double t, const Vec& q);

/**
 * The averaged normal form H1(t,q,p) = h(P) - eps^2 G(t,q,P) + eps^2 d_t f(t,q) with
 * P = p + eps^2 d_q f(t,q), compiled once into shared trigonometric tables so that
 * values and the Hamiltonian field cost one table fill per phase point. eps is a call
 * parameter, not state, so one compilation serves a whole epsilon ladder.
 *
 * Evaluation uses mutable scratch buffers; instances are not safe to share across
 * threads (everything downstream runs single threaded).
 */
class NormalFormH1 {
public:
    NormalFormH1(const HamiltonianSpec& spec, const HomologicalSolution& hom);

    const HamiltonianSpec& spec() const { return spec_; }
    const HomologicalSolution& hom() const { return hom_; }

    double eval(double eps, double t, const Vec& q, const Vec& p) const;
    /** Canonical field of H1: qdot = d_p H1, pdot = -d_q H1, computed analytically. */
    void field(double eps, double t, const Vec& q, const Vec& p, Vec& qdot, Vec& pdot) const;
    /** d_t H1 at fixed (q, p), for the extended-energy drift monitor. */
    double dt(double eps, double t, const Vec& q, const Vec& p) const;

    /** d_q f and d_t f at (t, q), shared with the psi transfer. */
    Vec grad_f(double t, const Vec& q) const;
    double ft(double t, const Vec& q) const;

    /** G(t, q, p) and G(t, q, p0) (their difference is the momentum remainder). */
    double G(double t, const Vec& q, const Vec& p) const;
    double G_at_p0(double t, const Vec& q) const;

    /**
     * Hessian over (q, p) of the plain composition h(p) - eps^2 G(t,q,p), i.e. the
     * normal form with an empty corrector. Used for analytic variational flow of the
     * original system; only valid when hom().f is empty.
     */
    Mat hessian_plain(double eps, double t, const Vec& q, const Vec& p) const;

private:
    void fill(double t, const Vec& q) const;

    HamiltonianSpec spec_;
    HomologicalSolution hom_;
    TrigTable table_;
    TrigChannel cf_t_, cf_tt_;
    std::vector<TrigChannel> cf_q_, cf_tq_;
    std::vector<std::vector<TrigChannel>> cf_qq_;  // upper triangle used
    TrigPolyChannel cG_, cG_t_;
    std::vector<TrigPolyChannel> cG_q_, cG_p_;
    std::vector<TrigPolyChannel> cG_qq_, cG_qp_, cG_pp_;  // row-major n x n
    mutable std::vector<double> cbuf_, sbuf_, xbuf_;
    mutable std::vector<double> dpbuf_;
};

struct RemainderSweepResult {
    std::vector<double> epsilons;
    std::vector<double> sup_residuals;
    double slope = 0.0;
    CertificateReport report;
};

/**
 * Order regression for the normal form defect H1 - (h - eps^2 V - eps^2 (G - G|p0))
 * over an epsilon ladder. The (t, q) sample is a uniform grid; the momentum sample is
 * pinned to the resonant p0, where the averaging step is centered and the defect
 * carries no first-order momentum remainder. Pass iff the fitted slope >= min_slope.
 */
RemainderSweepResult remainder_order_sweep(const NormalFormH1& h1, const AveragedData& avg,
                                           const std::vector<double>& epsilons,
                                           int grid_n = 17, double min_slope = 3.5);

}  // namespace nhc
