#pragma once

#include <optional>

#include "nhcyl/certificate.hpp"
#include "nhcyl/fourier.hpp"
#include "nhcyl/hpoly.hpp"
#include "nhcyl/types.hpp"

namespace nhc {

/**
 * The model data: H(t, q, p) = h(p) - eps^2 G(t, q, p) on T x T^n x R^n, split at a
 * partial resonance p0 with dh(p0) = (omega, 0). Momenta and angles are ordered
 * (fast, slow): q = (q1 in T^m, q2 in T^r), p = (p1, p2). Periodic variables of G are
 * ordered (t, q1..., q2...); its momentum polynomials are in dp = p - p0.
 */
struct HamiltonianSpec {
    std::string name;
    int n = 0, m = 0, r = 0;
    Vec omega;  // size m
    Vec p0;     // size n
    HPoly h;
    FourierPoly G;

    /** Structural validation; throws ConfigError with the violated constraint named. */
    void validate(double tol_resonance = 1e-10) const;

    Vec p1_of(const Vec& p) const { return p.head(m); }
    Vec p2_of(const Vec& p) const { return p.tail(r); }
};

struct DiophantineResult {
    bool pass = true;
    double gamma = 0.0, tau = 0.0;
    int kmax = 0;
    /** min over scanned modes of |k0 + k.omega| * |k|^tau. */
    double min_normalized = 0.0;
    std::vector<int> argmin_k;
    int argmin_k0 = 0;
    /** Lowest-order violating mode when pass = false. */
    std::vector<int> worst_k;
    int worst_k0 = 0;
};

/**
 * Scan |k0 + k.omega| >= gamma / |k|^tau over 0 < |k|_inf <= kmax,
 * |k0| <= ceil(kmax (1 + |omega|)).
 */
DiophantineResult diophantine_check(const Vec& omega, double gamma, double tau, int kmax);

/**
 * Averaged potential V(q2): the (t, q1)-mean of G(., ., p0), i.e. the modes with
 * k_t = 0 and k_q1 = 0, reindexed over q2 alone.
 */
FourierSeries average_potential(const HamiltonianSpec& spec);

/** Solve d_{p2} h(p1, p2) = 0 by Newton from the p0 tail. */
Vec solve_P2(const HamiltonianSpec& spec, const Vec& p1, double tol_newton = 1e-12,
             int max_iter = 50);

/**
 * Everything derived from the averaged system that the later stages consume:
 * V and its derivatives, A = d^2 V(0), and the resonant sheet p2 = P2(p1) with the
 * associated normal Hessian B, drift energy h0 and fast frequency Omega0.
 */
class AveragedData {
public:
    AveragedData(const HamiltonianSpec& spec, double tol_newton = 1e-12, int max_iter = 50);

    const FourierSeries& V() const { return V_; }
    const Mat& A() const { return A_; }

    Vec gradV(const Vec& q2) const;
    Mat hessV(const Vec& q2) const;

    Vec P2(const Vec& p1) const;
    /** dP2/dp1 from the implicit function theorem: -B^{-1} d^2_{p2 p1} h. */
    Mat dP2(const Vec& p1) const;
    Mat B(const Vec& p1) const;
    double h0(const Vec& p1) const;
    Vec Omega0(const Vec& p1) const;
    Mat dOmega0(const Vec& p1) const;

    const HamiltonianSpec& spec() const { return spec_; }

private:
    HamiltonianSpec spec_;
    double tol_newton_;
    int max_iter_;
    FourierSeries V_;
    std::vector<FourierSeries> dV_;
    std::vector<std::vector<FourierSeries>> d2V_;
    Mat A_;
};

struct HypothesisOptions {
    double delta = 0.2;
    double tol_grad = 1e-10;
    double gamma = 0.2;
    double tau = 2.0;
    int kmax = 50;
    int ball_samples = 64;
    double tol_newton = 1e-12;
    int max_iter = 50;
    std::uint64_t seed = 123456789ull;
};

/**
 * Standing-hypothesis certificate: dh(p0) = (omega, 0); d^2 h positive definite on
 * the working box; V critical at 0 with A positive definite; B positive definite
 * over the momentum ball; omega Diophantine at (gamma, tau, kmax).
 */
CertificateReport check_hypotheses(const HamiltonianSpec& spec, const HypothesisOptions& opt);

}  // namespace nhc
