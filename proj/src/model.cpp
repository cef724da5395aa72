#include "nhcyl/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

namespace nhc {

void HamiltonianSpec::validate(double tol_resonance) const {
    if (n <= 0 || m <= 0 || r <= 0 || m + r != n)
        throw ConfigError("model: need n = m + r with m, r >= 1");
    if (omega.size() != m) throw ConfigError("model: omega must have m components");
    if (p0.size() != n) throw ConfigError("model: p0 must have n components");
    if (h.nvars() != n) throw ConfigError("model: h must be a polynomial in n momenta");
    if (G.dims() != 1 + n)
        throw ConfigError("model: G must be periodic in the declared variables (t, q1, q2)");
    if (G.npvars() != n)
        throw ConfigError("model: G momentum polynomials must have n variables");
    if (G.max_p_degree() > 2)
        throw ConfigError("model: G momentum dependence must have degree <= 2");
    Vec g = h.grad(p0);
    Vec target(n);
    target.head(m) = omega;
    target.tail(r).setZero();
    double res = (g - target).lpNorm<Eigen::Infinity>();
    if (res > tol_resonance)
        throw ConfigError("model: dh(p0) != (omega, 0); residual " + std::to_string(res));
}

DiophantineResult diophantine_check(const Vec& omega, double gamma, double tau, int kmax) {
    const int m = static_cast<int>(omega.size());
    DiophantineResult res;
    res.gamma = gamma;
    res.tau = tau;
    res.kmax = kmax;
    res.min_normalized = std::numeric_limits<double>::infinity();
    const int k0max = static_cast<int>(std::ceil(kmax * (1.0 + omega.norm())));

    std::vector<int> k(m, -kmax);
    bool done = false;
    int worst_kinf = std::numeric_limits<int>::max();
    double worst_norm = std::numeric_limits<double>::infinity();
    while (!done) {
        bool zero = true;
        int kinf = 0;
        for (int v : k) {
            if (v != 0) zero = false;
            kinf = std::max(kinf, std::abs(v));
        }
        if (!zero && kinf <= kmax) {
            double kw = 0.0, k2 = 0.0;
            for (int j = 0; j < m; ++j) {
                kw += k[j] * omega[j];
                k2 += static_cast<double>(k[j]) * k[j];
            }
            const double knorm = std::sqrt(k2);
            const double weight = std::pow(knorm, tau);
            for (int k0 = -k0max; k0 <= k0max; ++k0) {
                const double div = std::abs(k0 + kw);
                const double normalized = div * weight;
                if (normalized < res.min_normalized) {
                    res.min_normalized = normalized;
                    res.argmin_k = k;
                    res.argmin_k0 = k0;
                }
                if (normalized < gamma) {
                    res.pass = false;
                    // Report the lowest-order violation, not the first one scanned.
                    if (kinf < worst_kinf ||
                        (kinf == worst_kinf && normalized < worst_norm)) {
                        worst_kinf = kinf;
                        worst_norm = normalized;
                        res.worst_k = k;
                        res.worst_k0 = k0;
                    }
                }
            }
        }
        // odometer over k in [-kmax, kmax]^m
        int j = 0;
        for (; j < m; ++j) {
            if (k[j] < kmax) {
                ++k[j];
                break;
            }
            k[j] = -kmax;
        }
        done = (j == m);
    }
    return res;
}

FourierSeries average_potential(const HamiltonianSpec& spec) {
    spec.validate();
    FourierSeries V(spec.r);
    const FourierSeries g0 = spec.G.at_p0();
    for (const auto& [k, ab] : g0.modes()) {
        bool fast = (k[0] != 0);
        for (int j = 0; j < spec.m && !fast; ++j) fast = (k[1 + j] != 0);
        if (fast) continue;
        MultiIndex kq2(k.begin() + 1 + spec.m, k.end());
        V.add_mode(std::move(kq2), ab.first, ab.second);
    }
    V.prune();
    return V;
}

Vec solve_P2(const HamiltonianSpec& spec, const Vec& p1, double tol_newton, int max_iter) {
    Vec p(spec.n);
    p.head(spec.m) = p1;
    p.tail(spec.r) = spec.p0.tail(spec.r);
    for (int it = 0; it < max_iter; ++it) {
        Vec g = spec.h.grad(p).tail(spec.r);
        if (g.lpNorm<Eigen::Infinity>() <= tol_newton) return p.tail(spec.r);
        Mat J = spec.h.hess(p).bottomRightCorner(spec.r, spec.r);
        Eigen::LDLT<Mat> ldlt(J);
        if (ldlt.info() != Eigen::Success)
            throw NumericsError("solve_P2: singular p2-Hessian during Newton");
        p.tail(spec.r) -= ldlt.solve(g);
    }
    throw NumericsError(
        "solve_P2: Newton did not converge; p1 likely outside the convexity domain");
}

AveragedData::AveragedData(const HamiltonianSpec& spec, double tol_newton, int max_iter)
    : spec_(spec), tol_newton_(tol_newton), max_iter_(max_iter) {
    spec_.validate();
    V_ = average_potential(spec_);
    dV_.reserve(spec_.r);
    for (int i = 0; i < spec_.r; ++i) dV_.push_back(V_.derivative(i));
    d2V_.resize(spec_.r);
    for (int i = 0; i < spec_.r; ++i) {
        d2V_[i].reserve(spec_.r);
        for (int j = 0; j < spec_.r; ++j) d2V_[i].push_back(dV_[i].derivative(j));
    }
    A_ = hessV(Vec::Zero(spec_.r));
}

Vec AveragedData::gradV(const Vec& q2) const {
    Vec g(spec_.r);
    std::span<const double> x(q2.data(), static_cast<std::size_t>(q2.size()));
    for (int i = 0; i < spec_.r; ++i) g[i] = dV_[i].eval(x);
    return g;
}

Mat AveragedData::hessV(const Vec& q2) const {
    Mat H(spec_.r, spec_.r);
    std::span<const double> x(q2.data(), static_cast<std::size_t>(q2.size()));
    for (int i = 0; i < spec_.r; ++i)
        for (int j = 0; j < spec_.r; ++j) H(i, j) = d2V_[i][j].eval(x);
    return 0.5 * (H + H.transpose());
}

Vec AveragedData::P2(const Vec& p1) const { return solve_P2(spec_, p1, tol_newton_, max_iter_); }

Mat AveragedData::dP2(const Vec& p1) const {
    Vec p(spec_.n);
    p.head(spec_.m) = p1;
    p.tail(spec_.r) = P2(p1);
    Mat H = spec_.h.hess(p);
    Mat B = H.bottomRightCorner(spec_.r, spec_.r);
    Mat C = H.bottomLeftCorner(spec_.r, spec_.m);  // d^2 h / (d p2 d p1)
    return -B.ldlt().solve(C);
}

Mat AveragedData::B(const Vec& p1) const {
    Vec p(spec_.n);
    p.head(spec_.m) = p1;
    p.tail(spec_.r) = P2(p1);
    return spec_.h.hess(p).bottomRightCorner(spec_.r, spec_.r);
}

double AveragedData::h0(const Vec& p1) const {
    Vec p(spec_.n);
    p.head(spec_.m) = p1;
    p.tail(spec_.r) = P2(p1);
    return spec_.h.eval(p);
}

Vec AveragedData::Omega0(const Vec& p1) const {
    Vec p(spec_.n);
    p.head(spec_.m) = p1;
    p.tail(spec_.r) = P2(p1);
    return spec_.h.grad(p).head(spec_.m);
}

Mat AveragedData::dOmega0(const Vec& p1) const {
    Vec p(spec_.n);
    p.head(spec_.m) = p1;
    p.tail(spec_.r) = P2(p1);
    Mat H = spec_.h.hess(p);
    // Omega0(p1) = d_{p1} h(p1, P2(p1)):
    //   dOmega0 = d^2_{p1 p1} h + d^2_{p1 p2} h . dP2
    return H.topLeftCorner(spec_.m, spec_.m) + H.topRightCorner(spec_.m, spec_.r) * dP2(p1);
}

CertificateReport check_hypotheses(const HamiltonianSpec& spec, const HypothesisOptions& opt) {
    CertificateReport rep;
    rep.name = "hypotheses:" + spec.name;
    rep.inputs_hash = fnv1a(spec.name + std::to_string(opt.delta) + std::to_string(opt.seed));

    try {
        spec.validate(opt.tol_grad);
    } catch (const ConfigError& e) {
        rep.fail(e.what());
        return rep;
    }

    Vec target(spec.n);
    target.head(spec.m) = spec.omega;
    target.tail(spec.r).setZero();
    rep.require_le("grad_h_residual_at_p0",
                   (spec.h.grad(spec.p0) - target).lpNorm<Eigen::Infinity>(), opt.tol_grad);

    // Convexity of h over the working box around p0 (deterministic sample).
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double min_eig_h = std::numeric_limits<double>::infinity();
    for (int s = 0; s < opt.ball_samples; ++s) {
        Vec p = spec.p0;
        if (s > 0)
            for (int j = 0; j < spec.n; ++j) p[j] += opt.delta * u(rng);
        Eigen::SelfAdjointEigenSolver<Mat> es(spec.h.hess(p));
        min_eig_h = std::min(min_eig_h, es.eigenvalues().minCoeff());
    }
    rep.require_ge("min_eig_hess_h", min_eig_h, 0.0);
    if (min_eig_h <= 0.0) {
        rep.fail("Hessian not positive definite");
        return rep;  // Newton for P2 is meaningless past this point
    }

    AveragedData avg(spec, opt.tol_newton, opt.max_iter);
    rep.require_le("grad_V_at_0", avg.gradV(Vec::Zero(spec.r)).lpNorm<Eigen::Infinity>(),
                   opt.tol_grad);
    Eigen::SelfAdjointEigenSolver<Mat> esA(avg.A());
    rep.require_ge("min_eig_A", esA.eigenvalues().minCoeff(), 0.0);
    if (esA.eigenvalues().minCoeff() <= 0.0) rep.fail("A not positive definite");
    rep.measured["A_max_eig"] = esA.eigenvalues().maxCoeff();

    double min_eig_B = std::numeric_limits<double>::infinity();
    bool p2_ok = true;
    for (int s = 0; s < opt.ball_samples && p2_ok; ++s) {
        Vec p1 = spec.p0.head(spec.m);
        if (s > 0)
            for (int j = 0; j < spec.m; ++j) p1[j] += opt.delta * u(rng);
        try {
            Eigen::SelfAdjointEigenSolver<Mat> esB(avg.B(p1));
            min_eig_B = std::min(min_eig_B, esB.eigenvalues().minCoeff());
        } catch (const NumericsError& e) {
            rep.fail(e.what());
            p2_ok = false;
        }
    }
    if (p2_ok) {
        rep.require_ge("min_eig_B", min_eig_B, 0.0);
        if (min_eig_B <= 0.0) rep.fail("B not positive definite");
    }

    DiophantineResult dio = diophantine_check(spec.omega, opt.gamma, opt.tau, opt.kmax);
    rep.require_ge("diophantine_min_normalized", dio.min_normalized, opt.gamma);
    if (!dio.pass) {
        std::string mode = "(" + std::to_string(dio.worst_k0);
        for (int v : dio.worst_k) mode += ", " + std::to_string(v);
        mode += ")";
        rep.fail("omega fails the Diophantine condition at mode " + mode);
    }
    return rep;
}

}  // namespace nhc
