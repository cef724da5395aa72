#include "nhcyl/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace nhc {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& what) { throw ConfigError("scenario: " + what); }

double get_number(const ordered_json& j, const char* key, double fallback, bool required = false) {
    if (!j.contains(key)) {
        if (required) bad(std::string(key) + " is required");
        return fallback;
    }
    if (!j[key].is_number()) bad(std::string(key) + " must be a number");
    return j[key].get<double>();
}

int get_int(const ordered_json& j, const char* key, int fallback, bool required = false) {
    if (!j.contains(key)) {
        if (required) bad(std::string(key) + " is required");
        return fallback;
    }
    if (!j[key].is_number_integer()) bad(std::string(key) + " must be an integer");
    return j[key].get<int>();
}

Vec get_vector(const ordered_json& j, const char* key, int size) {
    if (!j.contains(key) || !j[key].is_array())
        bad(std::string(key) + " must be an array of " + std::to_string(size) + " numbers");
    const auto& a = j[key];
    if (static_cast<int>(a.size()) != size)
        bad(std::string(key) + " must have " + std::to_string(size) + " entries");
    Vec v(size);
    for (int i = 0; i < size; ++i) {
        if (!a[i].is_number()) bad(std::string(key) + " entries must be numbers");
        v[i] = a[i].get<double>();
    }
    return v;
}

HPoly parse_h(const ordered_json& j, int n) {
    if (!j.contains("h") || !j["h"].is_object()) bad("h must be an object with a kind");
    const auto& h = j["h"];
    if (!h.contains("kind") || !h["kind"].is_string()) bad("h.kind must be a string");
    const std::string kind = h["kind"].get<std::string>();
    if (kind == "quadratic-isotropic") return HPoly::quadratic_isotropic(n);
    if (kind == "quadratic") {
        if (!h.contains("M") || !h["M"].is_array() || static_cast<int>(h["M"].size()) != n)
            bad("h.M must be an n x n array of rows");
        Mat M(n, n);
        for (int i = 0; i < n; ++i) {
            const auto& row = h["M"][i];
            if (!row.is_array() || static_cast<int>(row.size()) != n)
                bad("h.M rows must have n entries");
            for (int k = 0; k < n; ++k) {
                if (!row[k].is_number()) bad("h.M entries must be numbers");
                M(i, k) = row[k].get<double>();
            }
        }
        Vec b = Vec::Zero(n);
        if (h.contains("b")) b = get_vector(h, "b", n);
        const double c = get_number(h, "c", 0.0);
        return HPoly::quadratic(M, b, c);
    }
    bad("h.kind must be quadratic-isotropic or quadratic");
}

/** An amplitude is either a plain number or {"terms": [{"powers": [...], "coeff": x}]}. */
PPoly parse_amplitude(const ordered_json& j, int n, const char* key) {
    if (!j.contains(key)) return PPoly(n);
    const auto& a = j[key];
    if (a.is_number()) return PPoly::constant(n, a.get<double>());
    if (!a.is_object() || !a.contains("terms") || !a["terms"].is_array())
        bad(std::string("G mode ") + key + " must be a number or {\"terms\": [...]}");
    PPoly p(n);
    for (const auto& term : a["terms"]) {
        if (!term.is_object() || !term.contains("powers") || !term.contains("coeff"))
            bad("G polynomial terms need powers and coeff");
        const auto& pw = term["powers"];
        if (!pw.is_array() || static_cast<int>(pw.size()) != n)
            bad("G term powers must have n entries");
        MultiIndex powers(n);
        for (int i = 0; i < n; ++i) {
            if (!pw[i].is_number_integer() || pw[i].get<int>() < 0)
                bad("G term powers must be nonnegative integers");
            powers[i] = pw[i].get<int>();
        }
        if (!term["coeff"].is_number()) bad("G term coeff must be a number");
        p.add_term(powers, term["coeff"].get<double>());
    }
    return p;
}

FourierPoly parse_G(const ordered_json& j, int n, int m, int r) {
    if (!j.contains("G") || !j["G"].is_object() || !j["G"].contains("modes") ||
        !j["G"]["modes"].is_array())
        bad("G must be {\"modes\": [...]}");
    const int dims = 1 + m + r;
    FourierPoly G(dims, n);
    for (const auto& mode : j["G"]["modes"]) {
        if (!mode.is_object() || !mode.contains("k") || !mode["k"].is_array())
            bad("each G mode needs an index array k of length 1 + m + r");
        const auto& kj = mode["k"];
        if (static_cast<int>(kj.size()) != dims) bad("G mode k must have 1 + m + r entries");
        MultiIndex k(dims);
        for (int i = 0; i < dims; ++i) {
            if (!kj[i].is_number_integer()) bad("G mode k entries must be integers");
            k[i] = kj[i].get<int>();
        }
        PPoly a = parse_amplitude(mode, n, "cos");
        PPoly b = parse_amplitude(mode, n, "sin");
        if (a.is_zero() && b.is_zero()) bad("G mode with neither cos nor sin amplitude");
        G.add_mode(k, std::move(a), std::move(b));
    }
    return G;
}

Scenario make_pendulum_cylinder() {
    Scenario s;
    s.spec.name = "pendulum-cylinder";
    s.spec.n = 2;
    s.spec.m = 1;
    s.spec.r = 1;
    const double omega = (std::sqrt(5.0) - 1.0) / 2.0;
    s.spec.omega = Vec::Constant(1, omega);
    s.spec.p0 = Vec::Zero(2);
    s.spec.p0[0] = omega;
    s.spec.h = HPoly::quadratic_isotropic(2);

    // G = (1 - cos 2pi q2)(1 + 0.3 cos 2pi t cos 2pi q1)
    //     + 0.2 sin(2pi q2) cos(2pi (t - q1)) (1 + 0.5 dp1 + 0.25 dp2),
    // expanded into canonical modes over (t, q1, q2). The averaged potential is the
    // pendulum 1 - cos 2pi q2; everything else is oscillatory with nonresonant phases.
    FourierPoly G(3, 2);
    G.add_mode({0, 0, 0}, 1.0, 0.0);
    G.add_mode({0, 0, 1}, -1.0, 0.0);
    G.add_mode({1, 1, 0}, 0.15, 0.0);
    G.add_mode({1, -1, 0}, 0.15, 0.0);
    G.add_mode({1, 1, 1}, -0.075, 0.0);
    G.add_mode({1, 1, -1}, -0.075, 0.0);
    G.add_mode({1, -1, 1}, -0.075, 0.0);
    G.add_mode({1, -1, -1}, -0.075, 0.0);
    PPoly tilt(2);
    tilt.add_term({0, 0}, 1.0);
    tilt.add_term({1, 0}, 0.5);
    tilt.add_term({0, 1}, 0.25);
    PPoly plus = tilt, minus = tilt;
    plus *= 0.1;
    minus *= -0.1;
    G.add_mode({1, -1, 1}, PPoly(2), plus);
    G.add_mode({1, -1, -1}, PPoly(2), minus);
    s.spec.G = std::move(G);
    return s;
}

Scenario make_unperturbed() {
    Scenario s = make_pendulum_cylinder();
    s.spec.name = "unperturbed";
    FourierPoly G(3, 2);
    G.add_mode({0, 0, 0}, 1.0, 0.0);
    G.add_mode({0, 0, 1}, -1.0, 0.0);
    s.spec.G = std::move(G);
    return s;
}

}  // namespace

GridSpec Scenario::grid() const {
    if (spec.m != 1) bad("the solver grid needs exactly one fast angle (m = 1)");
    GridSpec g;
    g.nt = nt;
    g.nq = nq;
    g.np = np;
    g.p_lo = spec.p0[0] - delta;
    g.p_hi = spec.p0[0] + delta;
    return g;
}

CylinderConfig Scenario::cylinder_config() const {
    CylinderConfig c;
    c.grid = grid();
    c.tol_graph = tol.graph;
    c.tol_contain = tol.contain;
    c.seed = seed;
    return c;
}

void Scenario::validate() const {
    spec.validate(tol.resonance);
    if (spec.m != 1) bad("m must be 1 (scalar fast frequency window)");
    if (spec.r < 1) bad("r must be at least 1");
    if (spec.G.max_p_degree() > 2) bad("G momentum amplitudes must have degree <= 2");
    if (!(delta > 0.0 && delta < 1.0)) bad("delta must lie in (0, 1)");
    if (!(kappa > 0.0 && kappa < 1.0)) bad("kappa must lie in (0, 1)");
    if (epsilons.empty()) bad("epsilon ladder must be nonempty");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        const double e = epsilons[i];
        if (!(e > 0.0 && e < delta))
            bad("epsilon ladder entries must satisfy 0 < epsilon < delta");
        if (i > 0 && !(e < epsilons[i - 1]))
            bad("epsilon ladder must be strictly decreasing");
    }
    if (nt < 4 || nq < 4) bad("grid.nt and grid.nq must be at least 4");
    if (np < 5) bad("grid.np must be at least 5");
    if (!(tol.graph > 0.0 && tol.contain > 0.0 && tol.newton > 0.0 && tol.resonance > 0.0 &&
          tol.flow_defect > 0.0))
        bad("tolerances must be positive");
    if (out_dir.empty()) bad("out directory must be nonempty");
}

std::vector<std::string> builtin_names() { return {"pendulum-cylinder", "unperturbed"}; }

Scenario builtin_scenario(const std::string& name) {
    Scenario s;
    if (name == "pendulum-cylinder")
        s = make_pendulum_cylinder();
    else if (name == "unperturbed")
        s = make_unperturbed();
    else
        bad("unknown builtin \"" + name + "\"");
    s.validate();
    return s;
}

Scenario parse_scenario(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        bad(std::string("JSON parse failure: ") + e.what());
    }
    if (!j.is_object()) bad("top level must be an object");

    Scenario s;
    if (j.contains("name")) {
        if (!j["name"].is_string()) bad("name must be a string");
        s.spec.name = j["name"].get<std::string>();
    } else {
        s.spec.name = "custom";
    }
    s.spec.n = get_int(j, "n", 0, true);
    s.spec.m = get_int(j, "m", 0, true);
    s.spec.r = get_int(j, "r", 0, true);
    if (s.spec.n <= 0 || s.spec.m <= 0 || s.spec.r <= 0 || s.spec.m + s.spec.r != s.spec.n)
        bad("need n = m + r with all three positive");
    s.spec.omega = get_vector(j, "omega", s.spec.m);
    s.spec.p0 = get_vector(j, "p0", s.spec.n);
    s.spec.h = parse_h(j, s.spec.n);
    s.spec.G = parse_G(j, s.spec.n, s.spec.m, s.spec.r);

    if (j.contains("epsilon")) {
        if (!j["epsilon"].is_array() || j["epsilon"].empty())
            bad("epsilon must be a nonempty array");
        s.epsilons.clear();
        for (const auto& e : j["epsilon"]) {
            if (!e.is_number()) bad("epsilon entries must be numbers");
            s.epsilons.push_back(e.get<double>());
        }
    }
    s.delta = get_number(j, "delta", s.delta);
    s.kappa = get_number(j, "kappa", s.kappa);
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        if (!g.is_object()) bad("grid must be an object");
        s.nt = get_int(g, "nt", s.nt);
        s.nq = get_int(g, "nq", s.nq);
        s.np = get_int(g, "np", s.np);
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        if (!t.is_object()) bad("tolerances must be an object");
        s.tol.graph = get_number(t, "graph", s.tol.graph);
        s.tol.contain = get_number(t, "contain", s.tol.contain);
        s.tol.newton = get_number(t, "newton", s.tol.newton);
        s.tol.resonance = get_number(t, "resonance", s.tol.resonance);
        s.tol.flow_defect = get_number(t, "flow_defect", s.tol.flow_defect);
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
            bad("seed must be a nonnegative integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("out")) {
        if (!j["out"].is_string()) bad("out must be a string");
        s.out_dir = j["out"].get<std::string>();
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path_or_name) {
    for (const auto& b : builtin_names())
        if (path_or_name == b) return builtin_scenario(path_or_name);
    std::ifstream in(path_or_name);
    if (!in) bad("cannot open \"" + path_or_name + "\" (not a file or builtin name)");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace nhc
