#include "nhcyl/hpoly.hpp"

#include <cmath>

namespace nhc {

namespace {
double monomial(const MultiIndex& a, const Vec& p) {
    double m = 1.0;
    for (int j = 0; j < static_cast<int>(a.size()); ++j)
        for (int e = 0; e < a[j]; ++e) m *= p[j];
    return m;
}
}  // namespace

void HPoly::add_term(MultiIndex powers, double coeff) {
    if (static_cast<int>(powers.size()) != n_)
        throw ConfigError("HPoly::add_term: exponent dimension mismatch");
    t_[powers] += coeff;
}

double HPoly::eval(const Vec& p) const {
    double v = 0.0;
    for (const auto& [a, c] : t_) v += c * monomial(a, p);
    return v;
}

Vec HPoly::grad(const Vec& p) const {
    Vec g = Vec::Zero(n_);
    for (const auto& [a, c] : t_) {
        for (int j = 0; j < n_; ++j) {
            if (a[j] == 0) continue;
            MultiIndex b = a;
            b[j] -= 1;
            g[j] += c * a[j] * monomial(b, p);
        }
    }
    return g;
}

Mat HPoly::hess(const Vec& p) const {
    Mat H = Mat::Zero(n_, n_);
    for (const auto& [a, c] : t_) {
        for (int j = 0; j < n_; ++j) {
            if (a[j] == 0) continue;
            for (int l = j; l < n_; ++l) {
                MultiIndex b = a;
                b[j] -= 1;
                if (b[l] == 0) continue;
                double f = c * a[j] * b[l];
                b[l] -= 1;
                double v = f * monomial(b, p);
                H(j, l) += v;
                if (l != j) H(l, j) += v;
            }
        }
    }
    return H;
}

HPoly HPoly::quadratic_isotropic(int n) {
    HPoly h(n);
    for (int j = 0; j < n; ++j) {
        MultiIndex a(n, 0);
        a[j] = 2;
        h.add_term(a, 0.5);
    }
    return h;
}

HPoly HPoly::quadratic(const Mat& M, const Vec& b, double c) {
    const int n = static_cast<int>(M.rows());
    HPoly h(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            MultiIndex a(n, 0);
            a[i] += 1;
            a[j] += 1;
            double w = (i == j) ? 0.5 * M(i, j) : 0.5 * (M(i, j) + M(j, i));
            if (w != 0.0) h.add_term(a, w);
        }
        if (b.size() && b[i] != 0.0) {
            MultiIndex a(n, 0);
            a[i] = 1;
            h.add_term(a, b[i]);
        }
    }
    if (c != 0.0) h.add_term(MultiIndex(n, 0), c);
    return h;
}

}  // namespace nhc
