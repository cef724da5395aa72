#pragma once

#include <string>
#include <vector>

#include "nhcyl/cylinder.hpp"
#include "nhcyl/graph.hpp"
#include "nhcyl/model.hpp"

namespace nhc {

/** Tolerances a run may override from JSON; defaults match the certificates. */
struct RunTolerances {
    double graph = 1e-8;        // sup-norm target of the graph iteration update
    double contain = 1e-3;      // localization radius certified by containment
    double newton = 1e-12;      // resonant-sheet Newton solve
    double resonance = 1e-10;   // |dh(p0) - (omega, 0)| allowed at the base point
    double flow_defect = 1e-6;  // invariance residual under the time-h flow
};

/**
 * A fully specified run: the Hamiltonian, the epsilon ladder, the momentum window
 * and grid, tolerances, and the output location. Built either from one of the
 * builtin names or from a JSON file (schema in the README).
 */
struct Scenario {
    HamiltonianSpec spec;
    std::vector<double> epsilons{0.1, 0.05, 0.025};
    double delta = 0.2;
    double kappa = 0.1;
    int nt = 32, nq = 32, np = 33;
    RunTolerances tol;
    std::uint64_t seed = 123456789ull;
    std::string out_dir = "out";

    /** Solver grid over T x T x [p0_1 - delta, p0_1 + delta]; requires m = 1. */
    GridSpec grid() const;
    CylinderConfig cylinder_config() const;

    /** Ladder ordering, window and grid constraints; throws ConfigError. */
    void validate() const;
};

/** Names accepted by builtin_scenario, and by load_scenario in place of a path. */
std::vector<std::string> builtin_names();
Scenario builtin_scenario(const std::string& name);

/** Parse and validate a scenario from JSON text (also used by the tests). */
Scenario parse_scenario(const std::string& text);

/** Read a scenario from a file path, or fall back to a builtin of that name. */
Scenario load_scenario(const std::string& path_or_name);

}  // namespace nhc
