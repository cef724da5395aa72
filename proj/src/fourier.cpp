#include "nhcyl/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace nhc {

namespace {

// Canonical representative of +-k: first nonzero entry positive. Returns true if the
// index was flipped (in which case the sine amplitude changes sign).
bool canonicalize(MultiIndex& k) {
    for (int v : k) {
        if (v > 0) return false;
        if (v < 0) break;
    }
    bool nonzero = false;
    for (int v : k)
        if (v != 0) { nonzero = true; break; }
    if (!nonzero) return false;
    for (int& v : k) v = -v;
    return true;
}

std::complex<double> unit_phase(double x) {
    const double a = TWO_PI * x;
    return {std::cos(a), std::sin(a)};
}

}  // namespace

void FourierSeries::add_mode(MultiIndex k, double a, double b) {
    if (static_cast<int>(k.size()) != d_)
        throw ConfigError("FourierSeries::add_mode: index dimension mismatch");
    if (canonicalize(k)) b = -b;
    bool zero = std::all_of(k.begin(), k.end(), [](int v) { return v == 0; });
    if (zero) b = 0.0;  // sin(0) contributes nothing
    auto& [ca, cb] = c_[k];
    ca += a;
    cb += b;
}

double FourierSeries::eval(std::span<const double> x) const {
    double v = 0.0;
    for (const auto& [k, ab] : c_) {
        double phase = 0.0;
        for (int j = 0; j < d_; ++j) phase += k[j] * x[j];
        phase *= TWO_PI;
        v += ab.first * std::cos(phase) + ab.second * std::sin(phase);
    }
    return v;
}

FourierSeries FourierSeries::derivative(int var) const {
    // d/dx_var [a cos(2 pi k.x) + b sin(2 pi k.x)] = 2 pi k_var (b cos - a sin)
    FourierSeries out(d_);
    for (const auto& [k, ab] : c_) {
        const double w = TWO_PI * k[var];
        if (w == 0.0) continue;
        out.add_mode(k, w * ab.second, -w * ab.first);
    }
    return out;
}

double FourierSeries::mean() const {
    MultiIndex zero(d_, 0);
    auto it = c_.find(zero);
    return it == c_.end() ? 0.0 : it->second.first;
}

void FourierSeries::prune(double tol) {
    for (auto it = c_.begin(); it != c_.end();) {
        if (std::max(std::abs(it->second.first), std::abs(it->second.second)) <= tol)
            it = c_.erase(it);
        else
            ++it;
    }
}

double FourierSeries::coeff_norm1() const {
    double n = 0.0;
    for (const auto& [k, ab] : c_) n += std::abs(ab.first) + std::abs(ab.second);
    return n;
}

FourierSeries& FourierSeries::operator+=(const FourierSeries& o) {
    for (const auto& [k, ab] : o.c_) add_mode(k, ab.first, ab.second);
    return *this;
}

FourierSeries& FourierSeries::operator*=(double s) {
    for (auto& [k, ab] : c_) {
        ab.first *= s;
        ab.second *= s;
    }
    return *this;
}

PPoly PPoly::constant(int nvars, double c) {
    PPoly p(nvars);
    p.add_term(MultiIndex(nvars, 0), c);
    return p;
}

bool PPoly::is_zero(double tol) const {
    for (const auto& [a, c] : t_)
        if (std::abs(c) > tol) return false;
    return true;
}

int PPoly::degree() const {
    int d = 0;
    for (const auto& [a, c] : t_) {
        if (c == 0.0) continue;
        int s = 0;
        for (int e : a) s += e;
        d = std::max(d, s);
    }
    return d;
}

void PPoly::add_term(MultiIndex powers, double coeff) {
    if (static_cast<int>(powers.size()) != n_)
        throw ConfigError("PPoly::add_term: exponent dimension mismatch");
    t_[powers] += coeff;
}

double PPoly::eval(std::span<const double> dp) const {
    double v = 0.0;
    for (const auto& [a, c] : t_) {
        double m = c;
        for (int j = 0; j < n_; ++j)
            for (int e = 0; e < a[j]; ++e) m *= dp[j];
        v += m;
    }
    return v;
}

PPoly PPoly::derivative(int var) const {
    PPoly out(n_);
    for (const auto& [a, c] : t_) {
        if (a[var] == 0) continue;
        MultiIndex b = a;
        b[var] -= 1;
        out.add_term(b, c * a[var]);
    }
    return out;
}

double PPoly::constant_term() const {
    auto it = t_.find(MultiIndex(n_, 0));
    return it == t_.end() ? 0.0 : it->second;
}

PPoly PPoly::drop_constant() const {
    PPoly out = *this;
    out.t_.erase(MultiIndex(n_, 0));
    return out;
}

PPoly& PPoly::operator+=(const PPoly& o) {
    for (const auto& [a, c] : o.t_) add_term(a, c);
    return *this;
}

PPoly& PPoly::operator*=(double s) {
    for (auto& [a, c] : t_) c *= s;
    return *this;
}

void FourierPoly::add_mode(MultiIndex k, PPoly a, PPoly b) {
    if (static_cast<int>(k.size()) != d_)
        throw ConfigError("FourierPoly::add_mode: index dimension mismatch");
    if (a.nvars() != np_ || b.nvars() != np_)
        throw ConfigError("FourierPoly::add_mode: momentum polynomial dimension mismatch");
    if (canonicalize(k)) b *= -1.0;
    bool zero = std::all_of(k.begin(), k.end(), [](int v) { return v == 0; });
    if (zero) b = PPoly(np_);
    auto it = c_.find(k);
    if (it == c_.end()) {
        c_.emplace(std::move(k), std::make_pair(std::move(a), std::move(b)));
    } else {
        it->second.first += a;
        it->second.second += b;
    }
}

void FourierPoly::add_mode(MultiIndex k, double a, double b) {
    add_mode(std::move(k), PPoly::constant(np_, a), PPoly::constant(np_, b));
}

double FourierPoly::eval(std::span<const double> x, std::span<const double> dp) const {
    double v = 0.0;
    for (const auto& [k, ab] : c_) {
        double phase = 0.0;
        for (int j = 0; j < d_; ++j) phase += k[j] * x[j];
        phase *= TWO_PI;
        v += ab.first.eval(dp) * std::cos(phase) + ab.second.eval(dp) * std::sin(phase);
    }
    return v;
}

FourierPoly FourierPoly::derivative_periodic(int var) const {
    FourierPoly out(d_, np_);
    for (const auto& [k, ab] : c_) {
        const double w = TWO_PI * k[var];
        if (w == 0.0) continue;
        PPoly a = ab.second;
        a *= w;
        PPoly b = ab.first;
        b *= -w;
        out.add_mode(k, std::move(a), std::move(b));
    }
    return out;
}

FourierPoly FourierPoly::derivative_p(int pvar) const {
    FourierPoly out(d_, np_);
    for (const auto& [k, ab] : c_) {
        PPoly a = ab.first.derivative(pvar);
        PPoly b = ab.second.derivative(pvar);
        if (a.is_zero() && b.is_zero()) continue;
        out.add_mode(k, std::move(a), std::move(b));
    }
    return out;
}

FourierSeries FourierPoly::at_p0() const {
    FourierSeries out(d_);
    for (const auto& [k, ab] : c_) {
        const double a = ab.first.constant_term();
        const double b = ab.second.constant_term();
        if (a != 0.0 || b != 0.0) out.add_mode(k, a, b);
    }
    out.prune();
    return out;
}

FourierPoly FourierPoly::drop_p0() const {
    FourierPoly out(d_, np_);
    for (const auto& [k, ab] : c_) {
        PPoly a = ab.first.drop_constant();
        PPoly b = ab.second.drop_constant();
        if (a.is_zero() && b.is_zero()) continue;
        out.add_mode(k, std::move(a), std::move(b));
    }
    return out;
}

int FourierPoly::max_p_degree() const {
    int d = 0;
    for (const auto& [k, ab] : c_)
        d = std::max({d, ab.first.degree(), ab.second.degree()});
    return d;
}

int TrigTable::intern(const MultiIndex& k) {
    auto it = slot_.find(k);
    if (it != slot_.end()) return it->second;
    int s = static_cast<int>(modes_.size());
    modes_.push_back(k);
    slot_.emplace(k, s);
    return s;
}

void TrigTable::eval_point(std::span<const double> x, std::vector<double>& c,
                           std::vector<double>& s) const {
    c.resize(modes_.size());
    s.resize(modes_.size());
    // One complex exponential per variable, integer powers per mode. Mode orders are
    // small here (a handful of harmonics), so the power loop beats per-mode sincos.
    std::vector<std::complex<double>> z(d_), zc(d_);
    for (int j = 0; j < d_; ++j) {
        z[j] = unit_phase(x[j]);
        zc[j] = std::conj(z[j]);
    }
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        std::complex<double> w(1.0, 0.0);
        const MultiIndex& k = modes_[i];
        for (int j = 0; j < d_; ++j) {
            int e = k[j];
            const std::complex<double>& base = (e >= 0) ? z[j] : zc[j];
            for (int r = std::abs(e); r > 0; --r) w *= base;
        }
        c[i] = w.real();
        s[i] = w.imag();
    }
}

TrigChannel compile_channel(TrigTable& table, const FourierSeries& s) {
    TrigChannel ch;
    for (const auto& [k, ab] : s.modes()) {
        ch.slots.push_back(table.intern(k));
        ch.wa.push_back(ab.first);
        ch.wb.push_back(ab.second);
    }
    return ch;
}

TrigPolyChannel compile_channel(TrigTable& table, const FourierPoly& s) {
    TrigPolyChannel ch;
    for (const auto& [k, ab] : s.modes()) {
        ch.slots.push_back(table.intern(k));
        ch.pa.push_back(ab.first);
        ch.pb.push_back(ab.second);
    }
    return ch;
}

}  // namespace nhc
