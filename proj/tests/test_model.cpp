#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nhcyl/model.hpp"
#include "nhcyl/scenario.hpp"

using namespace nhc;

namespace {

/** h = p^T M p / 2 with a p1-p2 coupling, so P2 and Omega0 are nontrivial. */
HamiltonianSpec coupled_spec() {
    HamiltonianSpec spec;
    spec.name = "coupled";
    spec.n = 2;
    spec.m = 1;
    spec.r = 1;
    Mat M(2, 2);
    M << 2.0, 0.3, 0.3, 1.0;
    spec.h = HPoly::quadratic(M, Vec::Zero(2));
    spec.p0 = Vec(2);
    spec.p0 << 1.0, -0.3;  // d_p2 h = 0.3 p1 + p2 vanishes here
    spec.omega = Vec::Constant(1, 2.0 * 1.0 + 0.3 * -0.3);
    FourierPoly G(3, 2);
    G.add_mode({0, 0, 0}, 1.0, 0.0);
    G.add_mode({0, 0, 1}, -1.0, 0.0);
    spec.G = std::move(G);
    return spec;
}

}  // namespace

TEST_CASE("averaged potential equals the lattice mean over time and the fast angle") {
    const HamiltonianSpec spec = builtin_scenario("pendulum-cylinder").spec;
    const FourierSeries V = average_potential(spec);
    const int n = 32;
    for (double q2 : {0.0, 0.13, 0.37, 0.5, 0.81}) {
        double mean = 0.0;
        std::vector<double> x{0.0, 0.0, q2};
        const std::vector<double> dp{0.0, 0.0};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                x[0] = static_cast<double>(i) / n;
                x[1] = static_cast<double>(j) / n;
                mean += spec.G.eval(x, dp);
            }
        mean /= n * n;
        const std::vector<double> q{q2};
        CHECK(V.eval(q) == doctest::Approx(mean).epsilon(1e-12));
        CHECK(V.eval(q) == doctest::Approx(1.0 - std::cos(TWO_PI * q2)).epsilon(1e-12));
    }
}

TEST_CASE("averaged data reproduces the pendulum curvature and exact sheet") {
    const HamiltonianSpec spec = builtin_scenario("pendulum-cylinder").spec;
    const AveragedData avg(spec);
    CHECK(avg.A()(0, 0) == doctest::Approx(TWO_PI * TWO_PI).epsilon(1e-12));
    CHECK(avg.gradV(Vec::Zero(1)).norm() < 1e-14);
    for (double p1 : {0.45, 0.6180339887498949, 0.8}) {
        const Vec p1v = Vec::Constant(1, p1);
        CHECK(avg.P2(p1v).norm() < 1e-13);
        CHECK(avg.B(p1v)(0, 0) == doctest::Approx(1.0));
        CHECK(avg.Omega0(p1v)(0) == doctest::Approx(p1).epsilon(1e-13));
        CHECK(avg.dOmega0(p1v)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("resonant sheet of a coupled quadratic matches the closed form") {
    const HamiltonianSpec spec = coupled_spec();
    spec.validate();
    const AveragedData avg(spec);
    for (double p1 : {0.7, 1.0, 1.25}) {
        const Vec p1v = Vec::Constant(1, p1);
        CHECK(avg.P2(p1v)(0) == doctest::Approx(-0.3 * p1).epsilon(1e-12));
        CHECK(avg.dP2(p1v)(0, 0) == doctest::Approx(-0.3).epsilon(1e-12));
        CHECK(avg.Omega0(p1v)(0) == doctest::Approx(1.91 * p1).epsilon(1e-12));
        CHECK(avg.dOmega0(p1v)(0, 0) == doctest::Approx(1.91).epsilon(1e-12));
        CHECK(avg.B(p1v)(0, 0) == doctest::Approx(1.0));
    }
    CHECK(solve_P2(spec, Vec::Constant(1, 0.9))(0) == doctest::Approx(-0.27).epsilon(1e-12));
}

TEST_CASE("structural validation names a mismatched base point") {
    HamiltonianSpec spec = builtin_scenario("pendulum-cylinder").spec;
    spec.omega[0] = 0.7;  // no longer dh(p0) in the fast slot
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("Diophantine scan accepts the golden mean and rejects a rational") {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    const DiophantineResult good = diophantine_check(Vec::Constant(1, phi), 0.2, 2.0, 50);
    CHECK(good.pass);
    CHECK(good.min_normalized >= 0.2);

    const DiophantineResult bad = diophantine_check(Vec::Constant(1, 0.5), 0.2, 2.0, 10);
    CHECK_FALSE(bad.pass);
    REQUIRE(bad.worst_k.size() == 1);
    CHECK(std::abs(bad.worst_k[0]) == 2);  // the lowest-order resonance of 1/2
    CHECK(bad.worst_k0 * 2 + bad.worst_k[0] == 0);
}

TEST_CASE("standing hypotheses hold for the flagship scenario") {
    const Scenario sc = builtin_scenario("pendulum-cylinder");
    HypothesisOptions opt;
    opt.delta = sc.delta;
    const CertificateReport rep = check_hypotheses(sc.spec, opt);
    CHECK(rep.passed);
}
