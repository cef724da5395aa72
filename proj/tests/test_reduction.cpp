#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nhcyl/reduction.hpp"
#include "nhcyl/scaled.hpp"
#include "nhcyl/scenario.hpp"
#include "nhcyl/spd.hpp"

using namespace nhc;

namespace {

Mat random_spd(std::mt19937_64& rng, int n) {
    const auto u = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
    Mat R(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) R(i, j) = 2.0 * u() - 1.0;
    return R * R.transpose() + (0.1 + u()) * Mat::Identity(n, n);
}

}  // namespace

TEST_CASE("scalar scaling has the closed form L = (2 pi)^{-1/2}, D = 2 pi") {
    const Mat A = Mat::Constant(1, 1, TWO_PI * TWO_PI);
    const Mat B = Mat::Identity(1, 1);
    const Mat L = compute_L(A, B);
    CHECK(L(0, 0) == doctest::Approx(1.0 / std::sqrt(TWO_PI)).epsilon(1e-14));
    const LinearBlockData data = linear_block_check(A, B);
    CHECK(data.D(0, 0) == doctest::Approx(TWO_PI).epsilon(1e-13));
    CHECK(data.eq_residual < 1e-12);
    CHECK(data.stable_space_gap < 1e-10);
}

TEST_CASE("random SPD pairs satisfy the defining equation and conjugacy") {
    std::mt19937_64 rng(20240817u);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        const Mat A = random_spd(rng, n), B = random_spd(rng, n);
        const Mat L = compute_L(A, B);
        const Mat L2 = L * L;
        CHECK((L2 * A * L2 - B).norm() <= 1e-10);
        const Mat Linv = L.inverse();
        CHECK((L * A * L - Linv * B * Linv).norm() <= 1e-10);

        const LinearBlockData data = linear_block_check(A, B);
        CHECK(data.eq_residual <= 1e-10);
        CHECK(data.conj_residual <= 1e-10);
        CHECK(data.block_diag_residual <= 1e-9);
        CHECK(data.stable_space_gap <= 1e-8);
        CHECK(linear_block_certificate(A, B).passed);
    }
}

TEST_CASE("flagship reduction carries the constant pendulum rates") {
    const Scenario sc = builtin_scenario("pendulum-cylinder");
    const AveragedData avg(sc.spec);
    const ReductionData red(avg, sc.grid().p_nodes());

    CHECK(red.a() == doctest::Approx(TWO_PI).epsilon(1e-10));
    CHECK(red.alpha() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(red.b_bound() == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(red.eq_residual() <= 1e-12);

    const double p1 = sc.spec.p0[0] + 0.083;  // off the knot lattice
    CHECK(red.D(p1)(0, 0) == doctest::Approx(TWO_PI).epsilon(1e-11));
    CHECK(red.L(p1)(0, 0) == doctest::Approx(1.0 / std::sqrt(TWO_PI)).epsilon(1e-11));
    CHECK(red.Omega(p1) == doctest::Approx(p1).epsilon(1e-12));
    CHECK(red.dOmega(p1) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(red.P2t(p1).norm() < 1e-12);
}

TEST_CASE("scaled change matches the hand formula and inverts") {
    const Scenario sc = builtin_scenario("pendulum-cylinder");
    const AveragedData avg(sc.spec);
    const ReductionData red(avg, sc.grid().p_nodes());

    const double p1 = sc.spec.p0[0] - 0.05, eps = 0.1;
    const Vec q2 = Vec::Constant(1, 0.1), p2 = Vec::Constant(1, 0.03);
    Vec x(1), y(1);
    red.to_xy(p1, eps, q2, p2, x, y);

    const double L = 1.0 / std::sqrt(TWO_PI), Linv = std::sqrt(TWO_PI);
    CHECK(x[0] == doctest::Approx(L * 0.03 + eps * Linv * 0.1).epsilon(1e-10));
    CHECK(y[0] == doctest::Approx(L * 0.03 - eps * Linv * 0.1).epsilon(1e-10));

    Vec q2b(1), p2b(1);
    red.from_xy(p1, eps, x, y, q2b, p2b);
    CHECK(q2b[0] == doctest::Approx(q2[0]).epsilon(1e-12));
    CHECK(p2b[0] == doctest::Approx(p2[0]).epsilon(1e-12));
}

TEST_CASE("xy time derivatives equal differences along a moving path") {
    // A coupled h makes P2(p1) and L(p1) genuinely p1-dependent, so the transport
    // terms dL/dp1 and dP2/dp1 participate.
    HamiltonianSpec spec;
    spec.name = "coupled";
    spec.n = 2;
    spec.m = 1;
    spec.r = 1;
    Mat M(2, 2);
    M << 2.0, 0.3, 0.3, 1.0;
    spec.h = HPoly::quadratic(M, Vec::Zero(2));
    spec.p0 = Vec(2);
    spec.p0 << 1.0, -0.3;
    spec.omega = Vec::Constant(1, 1.91);
    FourierPoly G(3, 2);
    G.add_mode({0, 0, 0}, 1.0, 0.0);
    G.add_mode({0, 0, 1}, -0.8, 0.0);
    G.add_mode({1, 0, 1}, -0.2, 0.0);
    spec.G = std::move(G);

    const AveragedData avg(spec);
    GridSpec g;
    g.p_lo = 0.8;
    g.p_hi = 1.2;
    const ReductionData red(avg, g.p_nodes());

    const double eps = 0.1;
    const auto path = [](double s, double& p1, Vec& q2, Vec& p2) {
        p1 = 1.0 + 0.11 * s;
        q2 = Vec::Constant(1, 0.05 + 0.4 * s);
        p2 = Vec::Constant(1, -0.3 + 0.07 * s - 0.02 * s * s);
    };
    double p1;
    Vec q2(1), p2(1);
    path(0.0, p1, q2, p2);
    const double p1dot = 0.11;
    const Vec q2dot = Vec::Constant(1, 0.4);
    const Vec p2dot = Vec::Constant(1, 0.07);

    Vec xdot(1), ydot(1);
    xy_time_derivatives(red, p1, eps, q2, p2, p1dot, q2dot, p2dot, xdot, ydot);

    const double h = 1e-6;
    Vec xp(1), yp(1), xm(1), ym(1);
    double p1h;
    path(h, p1h, q2, p2);
    red.to_xy(p1h, eps, q2, p2, xp, yp);
    path(-h, p1h, q2, p2);
    red.to_xy(p1h, eps, q2, p2, xm, ym);
    CHECK(xdot[0] == doctest::Approx((xp[0] - xm[0]) / (2 * h)).epsilon(1e-6));
    CHECK(ydot[0] == doctest::Approx((yp[0] - ym[0]) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("scaled field reduces to the integrable core on the trivial cylinder") {
    const Scenario sc = builtin_scenario("unperturbed");
    const auto h1 = std::make_shared<const NormalFormH1>(sc.spec, solve_homological(sc.spec));
    const AveragedData avg(sc.spec);
    const auto red = std::make_shared<const ReductionData>(avg, sc.grid().p_nodes());
    const double eps = 0.05;
    const ScaledField F(h1, red, eps);

    const double t = 0.3;
    Vec q(2), p(2);
    q << 0.7, 0.0;
    p << sc.spec.p0[0] + 0.04, 0.0;
    const Vec s = F.pack(t, q, p);

    double t2;
    Vec q2(2), p2(2);
    F.unpack(eps * t, s, t2, q2, p2);
    CHECK(t2 == doctest::Approx(t).epsilon(1e-13));
    CHECK((q2 - q).norm() < 1e-12);
    CHECK((p2 - p).norm() < 1e-12);

    Vec ds(4);
    F.eval(eps * t, s, ds);
    CHECK(ds[0] == doctest::Approx(red->alpha() * p[0]).epsilon(1e-10));
    CHECK(std::abs(ds[1]) < 1e-12);
    CHECK(std::abs(ds[2]) < 1e-12);
    CHECK(std::abs(ds[3]) < 1e-12);

    Vec s_off = s;
    s_off[2] += 1e-3;  // small unstable offset: growth rate D = 2 pi
    F.eval(eps * t, s_off, ds);
    CHECK(ds[2] == doctest::Approx(TWO_PI * 1e-3).epsilon(0.01));
}
