#include "nhcyl/graph.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace nhc {

void fourier_transform(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    const double sgn = inverse ? 1.0 : -1.0;
    if ((n & (n - 1)) == 0) {
        for (std::size_t i = 1, j = 0; i < n; ++i) {
            std::size_t bit = n >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            if (i < j) std::swap(a[i], a[j]);
        }
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const double ang = sgn * TWO_PI / static_cast<double>(len);
            const std::complex<double> wl(std::cos(ang), std::sin(ang));
            for (std::size_t i = 0; i < n; i += len) {
                std::complex<double> w(1.0, 0.0);
                for (std::size_t k = 0; k < len / 2; ++k) {
                    const std::complex<double> u = a[i + k];
                    const std::complex<double> v = a[i + k + len / 2] * w;
                    a[i + k] = u + v;
                    a[i + k + len / 2] = u - v;
                    w *= wl;
                }
            }
        }
    } else {
        std::vector<std::complex<double>> out(n);
        for (std::size_t k = 0; k < n; ++k) {
            std::complex<double> acc(0.0, 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                const double ang = sgn * TWO_PI * static_cast<double>(k * j % n) / n;
                acc += a[j] * std::complex<double>(std::cos(ang), std::sin(ang));
            }
            out[k] = acc;
        }
        a = std::move(out);
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

void fourier_transform_2d(std::vector<std::complex<double>>& a, int n0, int n1, bool inverse) {
    std::vector<std::complex<double>> buf;
    buf.reserve(std::max(n0, n1));
    for (int i0 = 0; i0 < n0; ++i0) {
        buf.assign(a.begin() + static_cast<std::size_t>(i0) * n1,
                   a.begin() + static_cast<std::size_t>(i0 + 1) * n1);
        fourier_transform(buf, inverse);
        std::copy(buf.begin(), buf.end(), a.begin() + static_cast<std::size_t>(i0) * n1);
    }
    for (int i1 = 0; i1 < n1; ++i1) {
        buf.resize(n0);
        for (int i0 = 0; i0 < n0; ++i0) buf[i0] = a[static_cast<std::size_t>(i0) * n1 + i1];
        fourier_transform(buf, inverse);
        for (int i0 = 0; i0 < n0; ++i0) a[static_cast<std::size_t>(i0) * n1 + i1] = buf[i0];
    }
}

namespace {
inline int freq_of(int a, int n) { return 2 * a <= n ? a : a - n; }
inline bool is_nyquist(int a, int n) { return n % 2 == 0 && 2 * a == n; }
}  // namespace

Spectral2 Spectral2::analyze(int nt, int nq, std::span<const double> values) {
    Spectral2 s;
    s.nt = nt;
    s.nq = nq;
    s.c.assign(static_cast<std::size_t>(nt) * nq, {0.0, 0.0});
    for (std::size_t i = 0; i < s.c.size(); ++i) s.c[i] = values[i];
    fourier_transform_2d(s.c, nt, nq, false);
    const double scale = 1.0 / (static_cast<double>(nt) * nq);
    for (auto& z : s.c) z *= scale;
    return s;
}

void Spectral2::synthesize(std::span<double> values) const {
    std::vector<std::complex<double>> work(c);
    const double scale = static_cast<double>(nt) * nq;
    for (auto& z : work) z *= scale;
    fourier_transform_2d(work, nt, nq, true);
    for (std::size_t i = 0; i < work.size(); ++i) values[i] = work[i].real();
}

double Spectral2::eval(double t, double q) const {
    std::vector<std::complex<double>> ut(nt), uq(nq);
    for (int a = 0; a < nt; ++a) {
        if (is_nyquist(a, nt))
            ut[a] = std::cos(TWO_PI * 0.5 * nt * t);
        else {
            const double ang = TWO_PI * freq_of(a, nt) * t;
            ut[a] = {std::cos(ang), std::sin(ang)};
        }
    }
    for (int b = 0; b < nq; ++b) {
        if (is_nyquist(b, nq))
            uq[b] = std::cos(TWO_PI * 0.5 * nq * q);
        else {
            const double ang = TWO_PI * freq_of(b, nq) * q;
            uq[b] = {std::cos(ang), std::sin(ang)};
        }
    }
    std::complex<double> total(0.0, 0.0);
    for (int a = 0; a < nt; ++a) {
        std::complex<double> row(0.0, 0.0);
        const std::size_t base = static_cast<std::size_t>(a) * nq;
        for (int b = 0; b < nq; ++b) row += c[base + b] * uq[b];
        total += row * ut[a];
    }
    return total.real();
}

Spectral2 Spectral2::derivative_t() const {
    Spectral2 d = *this;
    for (int a = 0; a < nt; ++a) {
        const std::complex<double> mul =
            is_nyquist(a, nt) ? std::complex<double>(0.0, 0.0)
                              : std::complex<double>(0.0, TWO_PI * freq_of(a, nt));
        for (int b = 0; b < nq; ++b) d.c[static_cast<std::size_t>(a) * nq + b] *= mul;
    }
    return d;
}

Spectral2 Spectral2::derivative_q() const {
    Spectral2 d = *this;
    for (int b = 0; b < nq; ++b) {
        const std::complex<double> mul =
            is_nyquist(b, nq) ? std::complex<double>(0.0, 0.0)
                              : std::complex<double>(0.0, TWO_PI * freq_of(b, nq));
        for (int a = 0; a < nt; ++a) d.c[static_cast<std::size_t>(a) * nq + b] *= mul;
    }
    return d;
}

double Spectral2::tail_magnitude(int cut) const {
    double m = 0.0;
    for (int a = 0; a < nt; ++a)
        for (int b = 0; b < nq; ++b) {
            if (std::max(std::abs(freq_of(a, nt)), std::abs(freq_of(b, nq))) < cut) continue;
            m = std::max(m, std::abs(c[static_cast<std::size_t>(a) * nq + b]));
        }
    return m;
}

std::vector<double> GridSpec::p_nodes() const {
    std::vector<double> x(np);
    for (int k = 0; k < np; ++k) x[k] = p_node(k);
    return x;
}

void GridScalar::slice_p(int ip, std::vector<double>& out) const {
    out.resize(static_cast<std::size_t>(g_.nt) * g_.nq);
    for (int it = 0; it < g_.nt; ++it)
        for (int iq = 0; iq < g_.nq; ++iq)
            out[static_cast<std::size_t>(it) * g_.nq + iq] = at(it, iq, ip);
}

void GridScalar::set_slice_p(int ip, std::span<const double> in) {
    for (int it = 0; it < g_.nt; ++it)
        for (int iq = 0; iq < g_.nq; ++iq)
            at(it, iq, ip) = in[static_cast<std::size_t>(it) * g_.nq + iq];
}

double GridScalar::max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
}

double GridScalar::max_abs_inner(int ip_lo, int ip_hi) const {
    double m = 0.0;
    for (int it = 0; it < g_.nt; ++it)
        for (int iq = 0; iq < g_.nq; ++iq)
            for (int ip = ip_lo; ip <= ip_hi; ++ip)
                m = std::max(m, std::abs(at(it, iq, ip)));
    return m;
}

GridInterp::GridInterp(const GridScalar& f, std::shared_ptr<const SplineBasis> basis)
    : g_(f.grid()), basis_(std::move(basis)) {
    slices_.reserve(g_.np);
    std::vector<double> slab;
    for (int ip = 0; ip < g_.np; ++ip) {
        f.slice_p(ip, slab);
        slices_.push_back(Spectral2::analyze(g_.nt, g_.nq, slab));
    }
}

double GridInterp::eval(double t, double q, double p) const {
    std::vector<double> vals(g_.np);
    for (int ip = 0; ip < g_.np; ++ip) vals[ip] = slices_[ip].eval(t, q);
    return CubicSpline(basis_, vals).eval(p);
}

void GraphFunction::allocate() {
    q2.assign(r, GridScalar(grid));
    p2.assign(r, GridScalar(grid));
    X.assign(r, GridScalar(grid));
    Y.assign(r, GridScalar(grid));
    basis = std::make_shared<SplineBasis>(grid.p_nodes());
}

double GraphFunction::xy_c0_norm() const {
    double m = 0.0;
    for (const auto& g : X) m = std::max(m, g.max_abs());
    for (const auto& g : Y) m = std::max(m, g.max_abs());
    return m;
}

void save_graph(const GraphFunction& g, const std::string& dir, const std::string& stem) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    nlohmann::ordered_json hdr;
    hdr["format"] = "nhcyl-graph/1";
    hdr["scenario"] = g.scenario;
    hdr["frame"] = g.frame;
    hdr["eps"] = g.eps;
    hdr["delta"] = g.delta;
    hdr["alpha"] = g.alpha;
    hdr["m"] = g.m;
    hdr["r"] = g.r;
    hdr["grid"] = {{"nt", g.grid.nt},
                   {"nq", g.grid.nq},
                   {"np", g.grid.np},
                   {"p_lo", g.grid.p_lo},
                   {"p_hi", g.grid.p_hi}};
    std::vector<std::string> cols = {"t", "q1", "p1"};
    for (int i = 0; i < g.r; ++i) cols.push_back("q2_" + std::to_string(i));
    for (int i = 0; i < g.r; ++i) cols.push_back("p2_" + std::to_string(i));
    hdr["columns"] = cols;
    hdr["data"] = stem + ".csv";

    std::ofstream jf(fs::path(dir) / (stem + ".json"), std::ios::binary);
    if (!jf) throw ConfigError("graph: cannot write " + stem + ".json under " + dir);
    jf << hdr.dump(2) << "\n";

    std::ofstream cf(fs::path(dir) / (stem + ".csv"), std::ios::binary);
    if (!cf) throw ConfigError("graph: cannot write " + stem + ".csv under " + dir);
    for (std::size_t i = 0; i < cols.size(); ++i) cf << (i ? "," : "") << cols[i];
    cf << "\n";
    char buf[32];
    auto put = [&](double v, bool lead_comma) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        if (lead_comma) cf << ",";
        cf << buf;
    };
    for (int it = 0; it < g.grid.nt; ++it)
        for (int iq = 0; iq < g.grid.nq; ++iq)
            for (int ip = 0; ip < g.grid.np; ++ip) {
                put(g.grid.t_node(it), false);
                put(g.grid.q_node(iq), true);
                put(g.grid.p_node(ip), true);
                for (int i = 0; i < g.r; ++i) put(g.q2[i].at(it, iq, ip), true);
                for (int i = 0; i < g.r; ++i) put(g.p2[i].at(it, iq, ip), true);
                cf << "\n";
            }
}

GraphFunction load_graph(const std::string& dir, const std::string& stem) {
    namespace fs = std::filesystem;
    std::ifstream jf(fs::path(dir) / (stem + ".json"));
    if (!jf) throw ConfigError("graph: missing " + stem + ".json under " + dir);
    nlohmann::json hdr = nlohmann::json::parse(jf);
    if (hdr.value("format", "") != "nhcyl-graph/1")
        throw ConfigError("graph: unrecognized graph format in " + stem + ".json");

    GraphFunction g;
    g.scenario = hdr.value("scenario", "");
    g.frame = hdr.value("frame", "H1");
    g.eps = hdr["eps"].get<double>();
    g.delta = hdr["delta"].get<double>();
    g.alpha = hdr["alpha"].get<double>();
    g.m = hdr["m"].get<int>();
    g.r = hdr["r"].get<int>();
    g.grid.nt = hdr["grid"]["nt"].get<int>();
    g.grid.nq = hdr["grid"]["nq"].get<int>();
    g.grid.np = hdr["grid"]["np"].get<int>();
    g.grid.p_lo = hdr["grid"]["p_lo"].get<double>();
    g.grid.p_hi = hdr["grid"]["p_hi"].get<double>();
    g.allocate();
    g.X.clear();
    g.Y.clear();

    std::ifstream cf(fs::path(dir) / hdr["data"].get<std::string>());
    if (!cf) throw ConfigError("graph: missing data file for " + stem);
    std::string line;
    std::getline(cf, line);  // header
    const int want = 3 + 2 * g.r;
    for (int it = 0; it < g.grid.nt; ++it)
        for (int iq = 0; iq < g.grid.nq; ++iq)
            for (int ip = 0; ip < g.grid.np; ++ip) {
                if (!std::getline(cf, line))
                    throw ConfigError("graph: data file truncated in " + stem);
                std::istringstream ls(line);
                std::vector<double> row;
                std::string cell;
                while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
                if (static_cast<int>(row.size()) != want)
                    throw ConfigError("graph: bad column count in " + stem);
                for (int i = 0; i < g.r; ++i) g.q2[i].at(it, iq, ip) = row[3 + i];
                for (int i = 0; i < g.r; ++i) g.p2[i].at(it, iq, ip) = row[3 + g.r + i];
            }
    return g;
}

}  // namespace nhc
