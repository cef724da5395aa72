#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "nhcyl/cylinder.hpp"
#include "nhcyl/scenario.hpp"

using namespace nhc;

namespace {

struct Setup {
    Scenario sc;
    std::shared_ptr<const NormalFormH1> h1;
    std::shared_ptr<const ReductionData> red;

    explicit Setup(const std::string& name) : sc(builtin_scenario(name)) {
        h1 = std::make_shared<const NormalFormH1>(sc.spec, solve_homological(sc.spec));
        const AveragedData avg(sc.spec);
        red = std::make_shared<const ReductionData>(avg, sc.grid().p_nodes());
    }
};

const Setup& flagship() {
    static const Setup s("pendulum-cylinder");
    return s;
}

// Solved once and shared; the solve itself is a few seconds.
const CylinderSolution& flagship_solution() {
    static const CylinderSolution sol = [] {
        const Setup& s = flagship();
        return solve_cylinder(s.h1, s.red, 0.1, s.sc.cylinder_config());
    }();
    return sol;
}

}  // namespace

TEST_CASE("the decoupled pendulum has the flat graph exactly") {
    const Setup s("unperturbed");
    const CylinderSolution sol = solve_cylinder(s.h1, s.red, 0.05, s.sc.cylinder_config());
    CHECK(sol.xy_c0 <= 1e-12);
    CHECK(sol.remainder_c0 <= 1e-12);
    CHECK(sol.history.converged);
    CHECK(sol.history.sweeps <= 2);
    CHECK(sol.report.passed);

    const InvarianceResult inv = invariance_residual(sol, 0.1, 4);
    CHECK(inv.residual <= 1e-8);
    CHECK(inv.report.passed);
}

TEST_CASE("the flagship graph solves and sits under the contraction bound") {
    const CylinderSolution& sol = flagship_solution();
    CHECK(sol.history.converged);
    CHECK(sol.report.passed);
    CHECK(sol.a == doctest::Approx(TWO_PI).epsilon(1e-9));
    CHECK(sol.b == doctest::Approx(0.5).epsilon(1e-9));
    // The graph is an order eps^2 object and must respect the a-priori bound.
    CHECK(sol.xy_c0 > 1e-5);
    CHECK(sol.xy_c0 < 5e-2);
    CHECK(sol.xy_c0 <= 2.0 * sol.remainder_c0 / sol.a);
}

TEST_CASE("the flow-map defect of the flagship graph is small") {
    const InvarianceResult inv = invariance_residual(flagship_solution(), 0.1, 2);
    CHECK(inv.residual <= 1e-6);
    CHECK(inv.samples > 0);
    CHECK(inv.report.passed);
}

TEST_CASE("rehydration reproduces the solved margins without re-solving") {
    const CylinderSolution& sol = flagship_solution();
    const Setup& s = flagship();
    const CylinderSolution re = rehydrate_solution(s.h1, s.red, sol.eps, sol.cfg, sol.graph);
    CHECK(re.xy_c0 == doctest::Approx(sol.xy_c0).epsilon(1e-12));
    CHECK(re.remainder_c0 == doctest::Approx(sol.remainder_c0).epsilon(1e-12));
    CHECK(re.report.passed);

    CylinderConfig bad = sol.cfg;
    bad.grid.nt = 16;
    CHECK_THROWS_AS(rehydrate_solution(s.h1, s.red, sol.eps, bad, sol.graph), ConfigError);
}

TEST_CASE("graph norms stay inside the coincidence hypotheses at eps = 0.1") {
    const NormEstimates est = estimate_norms(flagship_solution(), 0.1);
    CHECK(est.report.passed);
    CHECK(est.q2_c0 < 0.05);
    CHECK(est.dp2_c0 < 0.05);
    CHECK(0.1 * est.q2_c1 <= 0.1);
    CHECK(est.dp2_c1 <= 0.1);
}

TEST_CASE("measured exponents split into the hyperbolic pair and a slow band") {
    const HyperbolicityResult hyp = hyperbolicity_rates(flagship_solution(), 2, 4.0);
    CHECK(hyp.report.passed);
    REQUIRE(hyp.exponents.size() == 4);
    CHECK(hyp.normal_rate_error <= 0.2);
    CHECK(hyp.exponents.front() > 0.0);
    CHECK(hyp.exponents.back() < 0.0);
    CHECK(hyp.tangential_rate <= flagship_solution().b);
    CHECK(hyp.b_measured <= flagship_solution().a);
}

TEST_CASE("the trapping experiment certifies the claimed distance") {
    const ContainmentResult con = containment_test(flagship_solution(), 16);
    CHECK(con.report.passed);
    CHECK(con.survivors >= 1);
    CHECK(con.survivors + con.escaped_forward + con.escaped_backward >= con.n_seeds);
    CHECK(con.c_amp ==
          doctest::Approx(std::exp(0.1 * flagship_solution().a * con.horizon)).epsilon(1e-10));
    CHECK(con.claim ==
          doctest::Approx(std::sqrt(2.0) * con.box / con.c_amp).epsilon(1e-12));
    CHECK(con.claim <= 1e-3);
    CHECK(con.worst_survivor_offset <= 1e-3);
}

TEST_CASE("the flow defect tracks the solver tolerance above the grid floor") {
    const Setup& s = flagship();
    CylinderConfig loose = s.sc.cylinder_config();
    loose.tol_graph = 1e-4;
    const CylinderSolution sol_a = solve_cylinder(s.h1, s.red, 0.05, loose);
    const double ra = invariance_residual(sol_a, 0.1, 4, 1.0).residual;

    CylinderConfig tight = loose;
    tight.tol_graph = 1e-5;
    const CylinderSolution sol_b = solve_cylinder(s.h1, s.red, 0.05, tight, &sol_a.graph);
    const double rb = invariance_residual(sol_b, 0.1, 4, 1.0).residual;

    CHECK(rb < ra);
    CHECK(ra >= 10.0 * rb);
}

TEST_CASE("a normal offset escapes at the predicted exponential rate") {
    const Setup s("unperturbed");
    const double eps = 0.05;
    const ScaledField F(s.h1, s.red, eps);

    const double x0 = 1e-5, x_stop = 1e-2;
    Vec s0(4);
    s0 << 0.0, s.sc.spec.p0[0], x0, 0.0;

    const HamiltonianSystem sys =
        make_ode(4, [&F](double tau, const Vec& z, Vec& dz) { F.eval(tau, z, dz); });
    FlowConfig cfg;
    cfg.step = 1e-3;
    cfg.inside = [x_stop](double, const Vec& z) { return std::abs(z[2]) < x_stop; };
    const FlowResult res = integrate(sys, 0.0, s0, 3.0, cfg);

    REQUIRE(res.escaped);
    const double expected = std::log(x_stop / x0) / TWO_PI;  // growth rate D = 2 pi
    CHECK(res.escape_time == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("the transfer to original momenta is the identity when f vanishes") {
    const Setup s("unperturbed");
    const CylinderSolution sol = solve_cylinder(s.h1, s.red, 0.05, s.sc.cylinder_config());
    const GraphFunction g = transfer_to_original(sol);
    CHECK(g.frame == "H");
    CHECK(g.grid == sol.graph.grid);
    REQUIRE(g.q2.size() == 1);
    REQUIRE(g.p2.size() == 1);
    CHECK(g.X.empty());
    double dev = 0.0;
    for (std::size_t i = 0; i < g.q2[0].data().size(); ++i) {
        dev = std::max(dev, std::abs(g.q2[0].data()[i] - sol.graph.q2[0].data()[i]));
        dev = std::max(dev, std::abs(g.p2[0].data()[i] - sol.graph.p2[0].data()[i]));
    }
    CHECK(dev <= 1e-12);
}

TEST_CASE("the transferred flagship graph keeps the lattice and changes frame") {
    const GraphFunction g = transfer_to_original(flagship_solution());
    CHECK(g.frame == "H");
    CHECK(g.eps == doctest::Approx(0.1));
    CHECK(g.grid == flagship_solution().graph.grid);
    double dev = 0.0;
    for (std::size_t i = 0; i < g.p2[0].data().size(); ++i)
        dev = std::max(dev, std::abs(g.p2[0].data()[i] - flagship_solution().graph.p2[0].data()[i]));
    CHECK(dev > 1e-8);   // the shear moves the sheet
    CHECK(dev < 1e-2);   // but only at order eps^2 (eps^2 = 0.01, corrector gradient < 1)
}
