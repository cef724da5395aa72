#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nhcyl/flow.hpp"
#include "nhcyl/scenario.hpp"

using namespace nhc;

namespace {

// Harmonic oscillator q'' = -(2 pi)^2 q via H = p^2/2 + (2 pi)^2 q^2 / 2.
HamiltonianSystem oscillator() {
    HamiltonianSystem sys;
    sys.dof = 1;
    const double w2 = TWO_PI * TWO_PI;
    sys.field = [w2](double, const Vec& z, Vec& dz) {
        dz[0] = z[1];
        dz[1] = -w2 * z[0];
    };
    sys.value = [w2](double, const Vec& z) {
        return 0.5 * z[1] * z[1] + 0.5 * w2 * z[0] * z[0];
    };
    sys.value_dt = [](double, const Vec&) { return 0.0; };
    return sys;
}

}  // namespace

TEST_CASE("rk4 reproduces the oscillator and converges at fourth order") {
    const HamiltonianSystem sys = oscillator();
    Vec z0(2);
    z0 << 0.3, 0.0;
    FlowConfig cfg;
    cfg.monitor_energy = false;

    double prev = 0.0;
    for (int k = 0; k < 3; ++k) {
        cfg.step = 1e-2 / (1 << k);
        const FlowResult res = integrate(sys, 0.0, z0, 1.0, cfg);
        const double err = std::abs(res.state[0] - 0.3) + std::abs(res.state[1]);
        if (k > 0) CHECK(err < prev / 12.0);  // 2^4 = 16 up to constants
        prev = err;
    }
    CHECK(prev < 5e-8);
}

TEST_CASE("the step must divide the horizon") {
    const HamiltonianSystem sys = oscillator();
    Vec z0(2);
    z0 << 0.1, 0.0;
    FlowConfig cfg;
    cfg.step = 0.3;
    CHECK_THROWS_AS(integrate(sys, 0.0, z0, 1.0, cfg), ConfigError);
}

TEST_CASE("the drift monitor halves the step until the rate passes") {
    const HamiltonianSystem sys = oscillator();
    Vec z0(2);
    z0 << 0.5, 0.0;
    FlowConfig cfg;
    cfg.step = 0.25;  // far too coarse for the period-one oscillation
    cfg.energy_tol = 1e-10;
    const FlowResult res = integrate(sys, 0.0, z0, 1.0, cfg);
    CHECK(res.step_used < cfg.step);
    if (res.drift_ok) CHECK(res.drift_rate <= cfg.energy_tol);
}

TEST_CASE("tangent propagation matches finite differences of the flow") {
    const Scenario sc = builtin_scenario("pendulum-cylinder");
    const double eps = 0.1;
    const HamiltonianSystem sys = make_original_system(sc.spec, eps);

    Vec z0(4);
    z0 << 0.2, 0.35, sc.spec.p0[0], 0.07;
    FlowConfig cfg;
    cfg.step = 1e-3;
    cfg.tangent = true;
    const FlowResult res = time_one_map(sys, z0, cfg);
    REQUIRE(res.jacobian.rows() == 4);
    CHECK(res.drift_ok);
    CHECK(std::abs(res.jacobian.determinant() - 1.0) < 1e-9);  // symplectic flow

    FlowConfig plain = cfg;
    plain.tangent = false;
    const double h = 1e-6;
    Mat J_fd(4, 4);
    for (int j = 0; j < 4; ++j) {
        Vec zp = z0, zm = z0;
        zp[j] += h;
        zm[j] -= h;
        const Vec fp = time_one_map(sys, zp, plain).state;
        const Vec fm = time_one_map(sys, zm, plain).state;
        J_fd.col(j) = (fp - fm) / (2 * h);
    }
    CHECK((res.jacobian - J_fd).norm() < 1e-5);
}

TEST_CASE("analytic and finite-difference tangents agree") {
    const Scenario sc = builtin_scenario("pendulum-cylinder");
    const double eps = 0.1;
    HamiltonianSystem sys = make_original_system(sc.spec, eps);
    REQUIRE(static_cast<bool>(sys.hessian));

    Vec z0(4);
    z0 << 0.6, 0.1, sc.spec.p0[0] - 0.03, -0.02;
    FlowConfig cfg;
    cfg.step = 2e-3;
    cfg.tangent = true;
    const Mat J_analytic = time_one_map(sys, z0, cfg).jacobian;

    sys.hessian = nullptr;
    const Mat J_fd = time_one_map(sys, z0, cfg).jacobian;
    CHECK((J_analytic - J_fd).norm() < 1e-6);
}

TEST_CASE("the normal form system with an empty corrector is the original one") {
    const Scenario sc = builtin_scenario("unperturbed");
    const auto h1 = std::make_shared<const NormalFormH1>(sc.spec, solve_homological(sc.spec));
    REQUIRE(h1->hom().f.mode_count() == 0);
    const double eps = 0.05;
    const HamiltonianSystem a = make_system(h1, eps);
    const HamiltonianSystem b = make_original_system(sc.spec, eps);
    CHECK(static_cast<bool>(a.hessian));

    Vec z(4);
    z << 0.15, 0.4, sc.spec.p0[0], 0.01;
    Vec da(4), db(4);
    a.field(0.37, z, da);
    b.field(0.37, z, db);
    CHECK((da - db).norm() < 1e-14);
    CHECK(a.value(0.37, z) == doctest::Approx(b.value(0.37, z)).epsilon(1e-14));
    CHECK((a.hessian(0.37, z) - b.hessian(0.37, z)).norm() < 1e-12);
}

TEST_CASE("the plain ode wrapper drives a linear field exactly enough") {
    // z' = (z2, -z1): rotation by angle 1 after unit time.
    const HamiltonianSystem sys =
        make_ode(2, [](double, const Vec& z, Vec& dz) {
            dz[0] = z[1];
            dz[1] = -z[0];
        });
    Vec z0(2);
    z0 << 1.0, 0.0;
    FlowConfig cfg;
    cfg.step = 1e-3;
    const FlowResult res = integrate(sys, 0.0, z0, 1.0, cfg);
    CHECK(res.state[0] == doctest::Approx(std::cos(1.0)).epsilon(1e-10));
    CHECK(res.state[1] == doctest::Approx(-std::sin(1.0)).epsilon(1e-10));

    FlowConfig rec = cfg;
    rec.record_every = 100;
    const FlowResult r2 = integrate(sys, 0.0, z0, 1.0, rec);
    REQUIRE(r2.times.size() == r2.states.size());
    CHECK(r2.times.size() == 11);  // endpoints plus every 100th of 1000 steps
    CHECK(r2.times.front() == doctest::Approx(0.0));
    CHECK(r2.times.back() == doctest::Approx(1.0));
}

TEST_CASE("the bounding-box guard stops the run and reports the exit time") {
    const HamiltonianSystem sys =
        make_ode(2, [](double, const Vec& z, Vec& dz) {
            dz[0] = 1.0;
            dz[1] = 0.0;
        });
    Vec z0(2);
    z0 << 0.0, 0.0;
    FlowConfig cfg;
    cfg.step = 1e-2;
    cfg.inside = [](double, const Vec& z) { return z[0] < 0.5; };
    const FlowResult res = integrate(sys, 0.0, z0, 1.0, cfg);
    CHECK(res.escaped);
    CHECK(res.escape_time == doctest::Approx(0.5).epsilon(0.05));
    CHECK(res.t_end <= 1.0);
}
