#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <vector>

#include "nhcyl/graph.hpp"
#include "nhcyl/spline.hpp"

using namespace nhc;

TEST_CASE("not-a-knot spline reproduces cubic polynomials exactly") {
    const auto poly = [](double x) { return ((0.5 * x - 1.0) * x + 2.0) * x - 0.7; };
    const auto dpoly = [](double x) { return (1.5 * x - 2.0) * x + 2.0; };
    std::vector<double> knots, y;
    for (int i = 0; i <= 12; ++i) {
        knots.push_back(-1.0 + 2.0 * i / 12.0);
        y.push_back(poly(knots.back()));
    }
    const CubicSpline s = make_spline(knots, y);
    for (double x : {-0.93, -0.4, 0.0, 0.33, 0.777, 1.0}) {
        CHECK(s.eval(x) == doctest::Approx(poly(x)).epsilon(1e-12));
        CHECK(s.deriv(x) == doctest::Approx(dpoly(x)).epsilon(1e-10));
    }
    for (int i = 0; i <= 12; ++i)
        CHECK(s.deriv_at_node(i) == doctest::Approx(dpoly(knots[i])).epsilon(1e-10));
}

TEST_CASE("spline converges on a smooth non-polynomial") {
    const auto f = [](double x) { return std::sin(3.0 * x) * std::exp(-x); };
    double prev_err = 0.0;
    for (int n : {8, 16, 32, 64}) {
        std::vector<double> knots, y;
        for (int i = 0; i <= n; ++i) {
            knots.push_back(static_cast<double>(i) / n);
            y.push_back(f(knots.back()));
        }
        const CubicSpline s = make_spline(knots, y);
        double err = 0.0;
        for (int j = 0; j <= 200; ++j) {
            const double x = j / 200.0;
            err = std::max(err, std::abs(s.eval(x) - f(x)));
        }
        if (prev_err > 0.0) CHECK(err < prev_err / 8.0);  // fourth order, 16x per halving
        prev_err = err;
    }
    CHECK(prev_err < 1e-6);
}

TEST_CASE("Spectral2 is exact on a band-limited function") {
    const int nt = 16, nq = 16;
    const auto f = [](double t, double q) {
        return 0.4 + std::cos(TWO_PI * (t + 2 * q)) - 0.7 * std::sin(TWO_PI * (3 * t - q));
    };
    std::vector<double> vals(nt * nq);
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nq; ++j)
            vals[i * nq + j] = f(static_cast<double>(i) / nt, static_cast<double>(j) / nq);
    const Spectral2 s = Spectral2::analyze(nt, nq, vals);

    CHECK(s.eval(0.13, 0.29) == doctest::Approx(f(0.13, 0.29)).epsilon(1e-12));
    const double h = 1e-6;
    const double dt_fd = (f(0.13 + h, 0.29) - f(0.13 - h, 0.29)) / (2 * h);
    const double dq_fd = (f(0.13, 0.29 + h) - f(0.13, 0.29 - h)) / (2 * h);
    CHECK(s.derivative_t().eval(0.13, 0.29) == doctest::Approx(dt_fd).epsilon(1e-6));
    CHECK(s.derivative_q().eval(0.13, 0.29) == doctest::Approx(dq_fd).epsilon(1e-6));
    CHECK(s.tail_magnitude(5) < 1e-13);

    std::vector<double> back(nt * nq);
    s.synthesize(back);
    for (int i = 0; i < nt * nq; ++i) CHECK(back[i] == doctest::Approx(vals[i]).epsilon(1e-12));
}

TEST_CASE("GridInterp reproduces a smooth field on and off the lattice") {
    GridSpec g;
    g.nt = 16;
    g.nq = 16;
    g.np = 9;
    g.p_lo = 0.4;
    g.p_hi = 0.8;
    const auto f = [](double t, double q, double p) {
        return std::sin(TWO_PI * t) * std::cos(TWO_PI * q) * (p * p - 0.3 * p);
    };
    GridScalar field(g);
    for (int it = 0; it < g.nt; ++it)
        for (int iq = 0; iq < g.nq; ++iq)
            for (int ip = 0; ip < g.np; ++ip)
                field.at(it, iq, ip) = f(g.t_node(it), g.q_node(iq), g.p_node(ip));
    const auto basis = std::make_shared<SplineBasis>(g.p_nodes());
    const GridInterp interp(field, basis);

    CHECK(interp.eval(g.t_node(3), g.q_node(7), g.p_node(5)) ==
          doctest::Approx(field.at(3, 7, 5)).epsilon(1e-12));
    CHECK(interp.eval(0.21, 0.68, 0.55) == doctest::Approx(f(0.21, 0.68, 0.55)).epsilon(1e-9));
    CHECK(field.max_abs() <= 0.4 * 1.0 + 1e-12);
}

TEST_CASE("graph save/load round trip is bytewise faithful") {
    GridSpec g;
    g.nt = 4;
    g.nq = 4;
    g.np = 5;
    g.p_lo = -0.1;
    g.p_hi = 0.1;
    GraphFunction gf;
    gf.grid = g;
    gf.m = 1;
    gf.r = 1;
    gf.scenario = "roundtrip";
    gf.frame = "H1";
    gf.eps = 0.05;
    gf.delta = 0.1;
    gf.alpha = 0.5;
    gf.basis = std::make_shared<SplineBasis>(g.p_nodes());
    gf.allocate();
    for (int it = 0; it < g.nt; ++it)
        for (int iq = 0; iq < g.nq; ++iq)
            for (int ip = 0; ip < g.np; ++ip) {
                gf.q2[0].at(it, iq, ip) = std::sin(1.0 + it + 2 * iq) / (3.0 + ip);
                gf.p2[0].at(it, iq, ip) = std::cos(2.0 + it - iq) * (1.0 + 0.1 * ip);
            }

    const std::string dir = (std::filesystem::temp_directory_path() / "nhcyl_graph_rt").string();
    save_graph(gf, dir, "g1");
    const GraphFunction back = load_graph(dir, "g1");
    CHECK(back.grid == g);
    CHECK(back.scenario == "roundtrip");
    CHECK(back.frame == "H1");
    CHECK(back.eps == doctest::Approx(0.05).epsilon(1e-16));
    for (int it = 0; it < g.nt; ++it)
        for (int iq = 0; iq < g.nq; ++iq)
            for (int ip = 0; ip < g.np; ++ip) {
                CHECK(back.q2[0].at(it, iq, ip) == gf.q2[0].at(it, iq, ip));
                CHECK(back.p2[0].at(it, iq, ip) == gf.p2[0].at(it, iq, ip));
            }

    // Determinism: saving the same graph twice produces identical bytes.
    save_graph(gf, dir, "g2");
    const auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(slurp(std::filesystem::path(dir) / "g1.csv") ==
          slurp(std::filesystem::path(dir) / "g2.csv"));
}
