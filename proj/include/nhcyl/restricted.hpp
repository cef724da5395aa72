#pragma once

#include "nhcyl/cylinder.hpp"

namespace nhc {

/** Sampling and flow knobs for the section analysis. */
struct RestrictedMapConfig {
    int nq = 32;               // angle samples on the section
    int np = 33;               // momentum samples across the inner ball
    double ball_fraction = 0.5;  // inner momentum ball, as a fraction of the window
    double flow_step = 1e-3;
    double fd_h = 1e-4;        // step for the graph-tangent differences
};

/**
 * The return map induced on the cylinder by the original (pre-averaging) flow:
 * seed the time-one map on the section t = 0 of the transferred graph, read off
 * the slow coordinates (q1, p1), and push tangent vectors of the graph embedding
 * through the variational flow. Compared against the unperturbed twist
 * (q1, p1) -> (q1 + Omega0(p1), p1).
 */
class RestrictedMap {
public:
    /** hgraph must be the frame-"H" graph matching the solution. */
    RestrictedMap(const CylinderSolution& sol, const GraphFunction& hgraph,
                  const RestrictedMapConfig& cfg = {});

    struct Sample {
        double q1 = 0.0, p1 = 0.0;        // section point
        double q1_image = 0.0, p1_image = 0.0;
        Mat dphi;                          // 2x2 restricted derivative
        Mat omega_here, omega_image;       // graph-induced two-form at x and Phi(x)
        double normal_defect = 0.0;        // distance of the full image from the graph
        double p1dot_scaled = 0.0;         // |p1dot| / eps^2 at the seed
    };
    Sample sample(double q1, double p1) const;

    /** Graph embedding tangent d(q1, Q2, p1, P2)/d(q1, p1) at the section. */
    Mat embedding_tangent(double q1, double p1) const;

    double omega0(double p1) const;
    double domega0(double p1) const;

private:
    const CylinderSolution& sol_;
    const GraphFunction& hgraph_;
    RestrictedMapConfig cfg_;
    HamiltonianSystem sys_;
    std::vector<GridInterp> iq2_, ip2_;
    int r_ = 0;
};

/**
 * Lattice sweep of the section: twist deviation, tangent deviation, normal
 * defect of the images, torsion, and the symplecticity of the restriction. The
 * certificate gates the per-epsilon claims (images back on the graph, torsion
 * bounded below, the induced area form preserved and nondegenerate); the decay
 * of the twist deviation across epsilon is the pipeline's ladder comparison.
 */
struct RestrictedSweep {
    double phi_dev = 0.0;         // sup |Phi - Phi0| (angle wrapped, max norm)
    double dphi_dev = 0.0;        // sup |dPhi - dPhi0|
    double section_defect = 0.0;  // sup distance of images from the section graph
    double torsion_min = 0.0;     // min d(q1 image)/d(p1) over samples
    double pullback_resid = 0.0;  // sup |dPhi^T omega(Phi x) dPhi - omega(x)|
    double det_min = 0.0;         // min |det omega|
    double p1dot_scaled = 0.0;    // max |p1dot| / eps^2, the slow-drift scale
    CertificateReport report;
};
RestrictedSweep analyze_restricted(const CylinderSolution& sol, const GraphFunction& hgraph,
                                   const RestrictedMapConfig& cfg = {});

}  // namespace nhc
