#pragma once

#include <memory>

#include "nhcyl/certificate.hpp"
#include "nhcyl/flow.hpp"
#include "nhcyl/graph.hpp"
#include "nhcyl/scaled.hpp"

namespace nhc {

/** Knobs shared by the graph solver and its certificates. */
struct CylinderConfig {
    GridSpec grid;
    double tol_graph = 1e-8;      // sup-norm stop for the fixed-point sweeps
    int max_sweeps = 200;
    double margin = 0.1;          // fraction of the coincidence box kept clear
    double inner_fraction = 0.8;  // momentum subwindow used for the C1 norms
    double flow_step = 1e-3;      // base t-step for flow-based diagnostics
    double tol_contain = 1e-3;    // certified containment distance
    std::uint64_t seed = 123456789ull;
};

/** Per-sweep corrections of the fixed-point iteration. */
struct SweepHistory {
    std::vector<double> updates;
    double rate = 0.0;  // median ratio of successive corrections
    int sweeps = 0;
    bool converged = false;
};

/**
 * The solved cylinder at one value of eps: the graph over (t, q1, p1) in the
 * averaged frame, the scaled-coordinate components it was computed in, and the
 * quantities every later certificate needs (rates a and b, the C0 size of the
 * graph, the C0 size of the momentum remainder it is compared against).
 */
struct CylinderSolution {
    std::shared_ptr<const NormalFormH1> h1;
    std::shared_ptr<const ReductionData> red;
    double eps = 0.0;
    CylinderConfig cfg;

    GraphFunction graph;  // frame "H1"; q2, p2, X, Y all populated
    SweepHistory history;
    double xy_c0 = 0.0;         // sup |(X, Y)| over the grid
    double remainder_c0 = 0.0;  // sup |G - G at p0| over the coincidence box
    double a = 0.0;             // normal expansion rate (min eig of D)
    double b = 0.0;             // slow C1 bound alpha * |dOmega0|
    double alpha = 0.0;
    double reference_horizon = 0.0;  // truncation horizon a tail-based solver would need

    CertificateReport report;
};

/**
 * Solves the invariance equation for the graph (x, y) = (X, Y)(t, q1, p1) of the
 * averaged system in scaled coordinates. Each sweep evaluates the full field on
 * the current graph, moves the linear hyperbolic part to the left-hand side, and
 * inverts it exactly mode-by-mode in a Fourier basis over the two angles (the
 * divisor 2 pi i (k0 + k1 Omega0) +- eps D is uniformly invertible because D is
 * positive definite). The reduction must share the grid's momentum knots.
 *
 * A non-null warm start is resampled onto the grid; otherwise the iteration
 * starts from the flat graph X = Y = 0. Throws NumericsError if the sweeps stop
 * contracting before reaching tol_graph.
 */
CylinderSolution solve_cylinder(std::shared_ptr<const NormalFormH1> h1,
                                std::shared_ptr<const ReductionData> red, double eps,
                                const CylinderConfig& cfg,
                                const GraphFunction* warm = nullptr);

/**
 * Rebuilds a CylinderSolution around a stored averaged-frame graph: the scaled
 * components, the coincidence margins and the remainder comparison are recomputed
 * from scratch, so every solver-independent certificate can be rerun against a
 * graph loaded from disk without repeating the solve.
 */
CylinderSolution rehydrate_solution(std::shared_ptr<const NormalFormH1> h1,
                                    std::shared_ptr<const ReductionData> red, double eps,
                                    const CylinderConfig& cfg, GraphFunction graph);

/**
 * Flow-map defect of the solved graph: every stride-th node is advected by h_step
 * under the averaged Hamiltonian and the advected point is compared against the
 * interpolated graph in scaled coordinates. The residual is the sup over sampled
 * nodes; it measures invariance independently of the solver's own equations.
 */
struct InvarianceResult {
    double residual = 0.0;
    double h_step = 0.0;
    std::size_t samples = 0;
    CertificateReport report;
};
InvarianceResult invariance_residual(const CylinderSolution& sol, double h_step = 0.1,
                                     int stride = 1, double tol_defect = 1e-6);

/**
 * Finite-difference C0/C1 norms of the graph over the inner momentum window:
 * q2 itself and the offset of p2 from the resonant sheet P2(p1). The C1 norms
 * gate the coincidence-domain hypotheses (eps |q2|_C1 and |p2 - P2|_C1 vs kappa).
 */
struct NormEstimates {
    double q2_c0 = 0.0, q2_c1 = 0.0;
    double dp2_c0 = 0.0, dp2_c1 = 0.0;
    CertificateReport report;
};
NormEstimates estimate_norms(const CylinderSolution& sol, double kappa);

/**
 * Benettin QR exponents of orbits on the cylinder, integrated in slow time with
 * the exact variational flow of the scaled field (finite-difference Jacobians).
 * Orbits are re-projected onto the solved graph at each QR epoch so the normal
 * instability cannot eject them over the averaging horizon. Exponents are in
 * slow-time units: the normal pair should bracket +-eig(D), the tangential pair
 * should stay below the slow C1 bound b.
 */
struct HyperbolicityResult {
    std::vector<double> exponents;   // sorted descending
    double normal_rate_error = 0.0;  // worst relative gap of the outer pairs vs eig(D)
    double tangential_rate = 0.0;    // max |middle exponents|
    double b_measured = 0.0;         // sup norm of the slow rows of sampled Jacobians
    CertificateReport report;
};
HyperbolicityResult hyperbolicity_rates(const CylinderSolution& sol, int n_orbits = 4,
                                        double T_tau = 6.0, double qr_interval = 0.5);

/**
 * Trapping experiment around the graph. Seeds are placed at graph points with
 * random normal offsets (log-uniform magnitude up to the scaled domain radius)
 * and flowed for the symmetric horizon T_half in both time directions. A seed
 * that never leaves the scaled box within [-T_half, T_half] must have started
 * within sqrt(2) box / c_amp of the graph, where c_amp = exp(eps a T_half) is
 * the amplification the horizon realizes; that distance is kept under
 * tol_contain by construction of the horizon. Seeds offset by more than
 * 4 box / c_amp must leave through the normal directions.
 */
struct ContainmentResult {
    double box = 0.0;       // radius of the scaled (x, y) domain
    double c_amp = 0.0;     // amplification realized over the horizon
    double horizon = 0.0;   // T_half in t units
    double claim = 0.0;     // sqrt(2) box / c_amp, the certified distance
    int n_seeds = 0;
    int survivors = 0;
    int escaped_forward = 0;
    int escaped_backward = 0;
    double worst_survivor_offset = 0.0;
    CertificateReport report;
};
ContainmentResult containment_test(const CylinderSolution& sol, int n_seeds = 64);

/**
 * Re-expresses the graph over the original (pre-averaging) momenta by undoing
 * the periodic momentum shear p -> p + eps^2 d_q f. The returned graph is
 * indexed by the original p1 on the same lattice (a short fixed-point solve per
 * node finds the averaged-frame momentum that lands there); X and Y are left
 * empty because the scaled coordinates belong to the averaged frame.
 */
GraphFunction transfer_to_original(const CylinderSolution& sol);

}  // namespace nhc
