#pragma once

#include <functional>
#include <memory>

#include "nhcyl/averaging.hpp"
#include "nhcyl/types.hpp"

namespace nhc {

/**
 * A time-periodic Hamiltonian system in integrator form: the canonical field on
 * z = (q, p), the value H(t, z) and d_t H (for the extended-energy drift monitor),
 * and optionally the Hessian of H for analytic tangent propagation. When `hessian`
 * is absent the tangent flow falls back to centered finite differences of the field.
 */
struct HamiltonianSystem {
    int dof = 0;  // state dimension is 2 * dof
    std::function<void(double t, const Vec& z, Vec& dz)> field;
    std::function<double(double t, const Vec& z)> value;
    std::function<double(double t, const Vec& z)> value_dt;
    std::function<Mat(double t, const Vec& z)> hessian;
};

struct FlowConfig {
    double step = 1e-3;
    bool tangent = false;
    /** Admissible drift per unit time of H(t,z) + e with de/dt = -d_t H. */
    double energy_tol = 1e-10;
    int max_halvings = 6;
    bool monitor_energy = true;
    /** Bounding-box guard; integration stops when it returns false. */
    std::function<bool(double t, const Vec& z)> inside;
    /** Record every k-th state (0 records endpoints only). */
    int record_every = 0;
};

struct FlowResult {
    double t_end = 0.0;
    Vec state;
    Mat jacobian;
    double drift_rate = 0.0;
    bool drift_ok = true;
    double step_used = 0.0;
    bool escaped = false;
    double escape_time = 0.0;
    std::vector<double> times;
    std::vector<Vec> states;
};

/**
 * Classical fixed-step fourth-order Runge-Kutta over [t0, t0 + horizon] (horizon may
 * be negative). The step must divide |horizon| to machine precision. When the drift
 * monitor is on, the whole run is repeated with a halved step until the drift rate
 * passes or max_halvings is exhausted (drift_ok reports the outcome).
 */
FlowResult integrate(const HamiltonianSystem& sys, double t0, const Vec& z0, double horizon,
                     const FlowConfig& cfg = {});

/** The time-one flow map phi from t = 0. */
FlowResult time_one_map(const HamiltonianSystem& sys, const Vec& z0,
                        const FlowConfig& cfg = {});

/**
 * Integrator form of the normal form H1 at fixed eps. When the averaging corrector f
 * is empty this is the original Hamiltonian h - eps^2 G itself, and the Hessian is
 * provided analytically; otherwise the Hessian is left unset (tangent propagation
 * then differentiates the field numerically).
 */
HamiltonianSystem make_system(std::shared_ptr<const NormalFormH1> h1, double eps);

/** The original system: h(p) - eps^2 G(t,q,p), with analytic Hessian. */
HamiltonianSystem make_original_system(const HamiltonianSpec& spec, double eps);

/**
 * Wraps a plain first-order field for the same RK4 driver (no energy monitor; tangent
 * propagation by finite differences). The state dimension must be even.
 */
HamiltonianSystem make_ode(int dim, std::function<void(double, const Vec&, Vec&)> f);

}  // namespace nhc
