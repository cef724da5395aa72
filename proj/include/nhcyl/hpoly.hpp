#pragma once

#include <map>

#include "nhcyl/fourier.hpp"
#include "nhcyl/types.hpp"

namespace nhc {

/**
 * Polynomial integrable Hamiltonian h(p) on R^n with analytic gradient and Hessian.
 * Terms are exponent-keyed in the absolute momenta (not shifted to p0).
 */
class HPoly {
public:
    HPoly() : n_(0) {}
    explicit HPoly(int nvars) : n_(nvars) {}

    int nvars() const { return n_; }
    void add_term(MultiIndex powers, double coeff);
    const std::map<MultiIndex, double>& terms() const { return t_; }

    double eval(const Vec& p) const;
    Vec grad(const Vec& p) const;
    Mat hess(const Vec& p) const;

    /** h = |p|^2 / 2. */
    static HPoly quadratic_isotropic(int n);
    /** h = p^T M p / 2 + b.p + c. */
    static HPoly quadratic(const Mat& M, const Vec& b, double c = 0.0);

private:
    int n_;
    std::map<MultiIndex, double> t_;
};

}  // namespace nhc
