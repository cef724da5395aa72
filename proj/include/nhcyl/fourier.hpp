#pragma once

#include <map>
#include <utility>

#include "nhcyl/types.hpp"

namespace nhc {

/** Integer multi-index; doubles as a monomial exponent list for momentum polynomials. */
using MultiIndex = std::vector<int>;

/**
 * Real trigonometric polynomial on the torus T^d:
 *
 *   s(x) = sum_k  a_k cos(2 pi k.x) + b_k sin(2 pi k.x)
 *
 * Modes are stored canonically: for k != 0 the first nonzero entry of k is positive
 * (the mirrored index labels the same basis pair up to the sign of b), and the k = 0
 * mode carries only a cosine (constant) amplitude. All derivative and mode surgery
 * operations stay inside this representation, which is what makes the homological
 * solve and the averaging projections exact.
 */
class FourierSeries {
public:
    FourierSeries() : d_(0) {}
    explicit FourierSeries(int dims) : d_(dims) {}

    int dims() const { return d_; }
    bool empty() const { return c_.empty(); }
    std::size_t mode_count() const { return c_.size(); }

    /** Accumulate a_k cos + b_k sin at index k (any sign convention; canonicalized here). */
    void add_mode(MultiIndex k, double a, double b);

    double eval(std::span<const double> x) const;

    /** Partial derivative with respect to periodic variable `var`. */
    FourierSeries derivative(int var) const;

    /** Mean over the torus (the k = 0 amplitude). */
    double mean() const;

    /** Drop modes with max |coeff| <= tol (cleanup after arithmetic). */
    void prune(double tol = 0.0);

    /** Sum of |a_k| + |b_k|; crude but rigorous sup-norm bound. */
    double coeff_norm1() const;

    const std::map<MultiIndex, std::pair<double, double>>& modes() const { return c_; }

    FourierSeries& operator+=(const FourierSeries& o);
    FourierSeries& operator*=(double s);

private:
    int d_;
    std::map<MultiIndex, std::pair<double, double>> c_;
};

/**
 * Polynomial in the shifted momenta dp = p - p0, exponent-keyed. The averaging
 * pipeline only needs total degree <= 2, which scenario validation enforces; the
 * class itself is degree-agnostic.
 */
class PPoly {
public:
    PPoly() : n_(0) {}
    explicit PPoly(int nvars) : n_(nvars) {}
    static PPoly constant(int nvars, double c);

    int nvars() const { return n_; }
    bool is_zero(double tol = 0.0) const;
    int degree() const;

    void add_term(MultiIndex powers, double coeff);
    double eval(std::span<const double> dp) const;
    PPoly derivative(int var) const;
    double constant_term() const;
    /** The polynomial minus its constant term (vanishes at p = p0). */
    PPoly drop_constant() const;

    const std::map<MultiIndex, double>& terms() const { return t_; }

    PPoly& operator+=(const PPoly& o);
    PPoly& operator*=(double s);

private:
    int n_;
    std::map<MultiIndex, double> t_;
};

/**
 * Trigonometric polynomial in (t, q) whose amplitudes are momentum polynomials:
 * the representation of the perturbation G(t, q, p). Mode canonicalization matches
 * FourierSeries.
 */
class FourierPoly {
public:
    FourierPoly() : d_(0), np_(0) {}
    FourierPoly(int dims, int npvars) : d_(dims), np_(npvars) {}

    int dims() const { return d_; }
    int npvars() const { return np_; }

    void add_mode(MultiIndex k, PPoly a, PPoly b);
    void add_mode(MultiIndex k, double a, double b);  // p-independent convenience

    double eval(std::span<const double> x, std::span<const double> dp) const;

    FourierPoly derivative_periodic(int var) const;
    FourierPoly derivative_p(int pvar) const;

    /** Freeze p = p0: the FourierSeries of constant terms. */
    FourierSeries at_p0() const;

    /** G - G(.,.,p0): the part that vanishes identically at p = p0. */
    FourierPoly drop_p0() const;

    int max_p_degree() const;

    const std::map<MultiIndex, std::pair<PPoly, PPoly>>& modes() const { return c_; }

private:
    int d_, np_;
    std::map<MultiIndex, std::pair<PPoly, PPoly>> c_;
};

/**
 * Shared cos/sin tables for a fixed mode list, so that a family of series derived
 * from the same G and f (values, gradients, Hessians) is evaluated with one set of
 * trigonometric calls per phase-space point. Channels are registered once; eval of
 * a channel is a dot product against the tables.
 */
class TrigTable {
public:
    explicit TrigTable(int dims) : d_(dims) {}

    int dims() const { return d_; }
    const std::vector<MultiIndex>& mode_list() const { return modes_; }

    /** Returns the slot of k in the table, inserting it if new. k must be canonical. */
    int intern(const MultiIndex& k);

    /** Fill cos/sin arrays for the point x (arrays sized mode_count). */
    void eval_point(std::span<const double> x, std::vector<double>& c,
                    std::vector<double>& s) const;

private:
    int d_;
    std::vector<MultiIndex> modes_;
    std::map<MultiIndex, int> slot_;
};

/** A series compiled against a TrigTable: constant weights per mode slot. */
struct TrigChannel {
    std::vector<int> slots;
    std::vector<double> wa, wb;

    double eval(const std::vector<double>& c, const std::vector<double>& s) const {
        double v = 0.0;
        for (std::size_t i = 0; i < slots.size(); ++i)
            v += wa[i] * c[slots[i]] + wb[i] * s[slots[i]];
        return v;
    }
};

/** As TrigChannel but with momentum-polynomial weights (compiled from a FourierPoly). */
struct TrigPolyChannel {
    std::vector<int> slots;
    std::vector<PPoly> pa, pb;

    double eval(const std::vector<double>& c, const std::vector<double>& s,
                std::span<const double> dp) const {
        double v = 0.0;
        for (std::size_t i = 0; i < slots.size(); ++i)
            v += pa[i].eval(dp) * c[slots[i]] + pb[i].eval(dp) * s[slots[i]];
        return v;
    }
};

TrigChannel compile_channel(TrigTable& table, const FourierSeries& s);
TrigPolyChannel compile_channel(TrigTable& table, const FourierPoly& s);

}  // namespace nhc
