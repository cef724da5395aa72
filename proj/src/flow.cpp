#include "nhcyl/flow.hpp"

#include <cmath>

namespace nhc {

namespace {

struct AugmentedState {
    Vec z;
    double e = 0.0;  // energy correction, de/dt = -d_t H
    Mat J;

    AugmentedState axpy(double a, const AugmentedState& d) const {
        AugmentedState out;
        out.z = z + a * d.z;
        out.e = e + a * d.e;
        if (J.size() > 0) out.J = J + a * d.J;
        return out;
    }
};

class Rhs {
public:
    Rhs(const HamiltonianSystem& sys, bool tangent, bool energy)
        : sys_(sys), tangent_(tangent), energy_(energy && sys.value_dt) {}

    AugmentedState operator()(double t, const AugmentedState& s) const {
        AugmentedState d;
        d.z.resize(s.z.size());
        sys_.field(t, s.z, d.z);
        d.e = energy_ ? -sys_.value_dt(t, s.z) : 0.0;
        if (tangent_) d.J = dfield(t, s.z) * s.J;
        return d;
    }

private:
    Mat dfield(double t, const Vec& z) const {
        const int n = sys_.dof;
        if (sys_.hessian) {
            const Mat S = sys_.hessian(t, z);
            Mat DF(2 * n, 2 * n);
            DF.topLeftCorner(n, n) = S.bottomLeftCorner(n, n);       // d_q d_p H
            DF.topRightCorner(n, n) = S.bottomRightCorner(n, n);     // d_p d_p H
            DF.bottomLeftCorner(n, n) = -S.topLeftCorner(n, n);      // -d_q d_q H
            DF.bottomRightCorner(n, n) = -S.topRightCorner(n, n);    // -d_p d_q H
            return DF;
        }
        const double h = 1e-6 * std::max(1.0, z.lpNorm<Eigen::Infinity>());
        Mat DF(2 * n, 2 * n);
        Vec zp, fp(2 * n), fm(2 * n);
        for (int j = 0; j < 2 * n; ++j) {
            zp = z;
            zp[j] += h;
            sys_.field(t, zp, fp);
            zp[j] -= 2 * h;
            sys_.field(t, zp, fm);
            DF.col(j) = (fp - fm) / (2 * h);
        }
        return DF;
    }

    const HamiltonianSystem& sys_;
    bool tangent_;
    bool energy_;
};

FlowResult run_once(const HamiltonianSystem& sys, double t0, const Vec& z0, double horizon,
                    const FlowConfig& cfg, double step) {
    const double absH = std::abs(horizon);
    const long long nsteps = std::llround(absH / step);
    if (nsteps <= 0 || std::abs(nsteps * step - absH) > 1e-9 * std::max(1.0, absH))
        throw ConfigError("flow: step must divide the horizon");
    const double h = (horizon < 0 ? -step : step);

    const bool energy = cfg.monitor_energy && sys.value && sys.value_dt;
    Rhs rhs(sys, cfg.tangent, energy);

    AugmentedState s;
    s.z = z0;
    if (cfg.tangent) s.J = Mat::Identity(2 * sys.dof, 2 * sys.dof);

    FlowResult res;
    res.step_used = step;
    const double E0 = energy ? sys.value(t0, z0) : 0.0;
    if (cfg.record_every > 0) {
        res.times.push_back(t0);
        res.states.push_back(z0);
    }

    double t = t0;
    for (long long i = 0; i < nsteps; ++i) {
        const AugmentedState k1 = rhs(t, s);
        const AugmentedState k2 = rhs(t + 0.5 * h, s.axpy(0.5 * h, k1));
        const AugmentedState k3 = rhs(t + 0.5 * h, s.axpy(0.5 * h, k2));
        const AugmentedState k4 = rhs(t + h, s.axpy(h, k3));
        s.z += (h / 6.0) * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
        s.e += (h / 6.0) * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e);
        if (cfg.tangent) s.J += (h / 6.0) * (k1.J + 2.0 * k2.J + 2.0 * k3.J + k4.J);
        t = t0 + (i + 1) * h;

        if (cfg.inside && !cfg.inside(t, s.z)) {
            res.escaped = true;
            res.escape_time = t;
            break;
        }
        if (cfg.record_every > 0 && ((i + 1) % cfg.record_every == 0 || i + 1 == nsteps)) {
            res.times.push_back(t);
            res.states.push_back(s.z);
        }
    }

    res.t_end = t;
    res.state = s.z;
    if (cfg.tangent) res.jacobian = s.J;
    if (energy) {
        const double drift = std::abs(sys.value(t, s.z) + s.e - E0);
        const double span = std::max(std::abs(t - t0), step);
        res.drift_rate = drift / span;
        res.drift_ok = res.drift_rate <= cfg.energy_tol;
    }
    return res;
}

}  // namespace

FlowResult integrate(const HamiltonianSystem& sys, double t0, const Vec& z0, double horizon,
                     const FlowConfig& cfg) {
    double step = cfg.step;
    FlowResult res = run_once(sys, t0, z0, horizon, cfg, step);
    int halvings = 0;
    while (!res.drift_ok && halvings < cfg.max_halvings) {
        step *= 0.5;
        ++halvings;
        res = run_once(sys, t0, z0, horizon, cfg, step);
    }
    return res;
}

FlowResult time_one_map(const HamiltonianSystem& sys, const Vec& z0, const FlowConfig& cfg) {
    return integrate(sys, 0.0, z0, 1.0, cfg);
}

HamiltonianSystem make_system(std::shared_ptr<const NormalFormH1> h1, double eps) {
    HamiltonianSystem sys;
    const int n = h1->spec().n;
    sys.dof = n;
    sys.field = [h1, eps, n](double t, const Vec& z, Vec& dz) {
        Vec qd(n), pd(n);
        h1->field(eps, t, z.head(n), z.tail(n), qd, pd);
        dz.head(n) = qd;
        dz.tail(n) = pd;
    };
    sys.value = [h1, eps, n](double t, const Vec& z) {
        return h1->eval(eps, t, z.head(n), z.tail(n));
    };
    sys.value_dt = [h1, eps, n](double t, const Vec& z) {
        return h1->dt(eps, t, z.head(n), z.tail(n));
    };
    if (h1->hom().f.empty()) {
        // Plain h - eps^2 G: the analytic Hessian is available.
        sys.hessian = [h1, eps, n](double t, const Vec& z) {
            return h1->hessian_plain(eps, t, z.head(n), z.tail(n));
        };
    }
    return sys;
}

HamiltonianSystem make_original_system(const HamiltonianSpec& spec, double eps) {
    HomologicalSolution empty;
    empty.f = FourierSeries(1 + spec.n);
    return make_system(std::make_shared<NormalFormH1>(spec, empty), eps);
}

HamiltonianSystem make_ode(int dim, std::function<void(double, const Vec&, Vec&)> f) {
    if (dim % 2 != 0) throw ConfigError("flow: plain fields need even state dimension");
    HamiltonianSystem sys;
    sys.dof = dim / 2;
    sys.field = std::move(f);
    return sys;
}

}  // namespace nhc
