#include "nhcyl/restricted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nhc {

namespace {

/** Canonical two-form on z = (q, p): omega(v, w) = v^T J w. */
Mat canonical_J(int n) {
    Mat J = Mat::Zero(2 * n, 2 * n);
    J.topRightCorner(n, n) = Mat::Identity(n, n);
    J.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    return J;
}

}  // namespace

RestrictedMap::RestrictedMap(const CylinderSolution& sol, const GraphFunction& hgraph,
                             const RestrictedMapConfig& cfg)
    : sol_(sol), hgraph_(hgraph), cfg_(cfg), r_(sol.red->r()) {
    if (hgraph.frame != "H")
        throw ConfigError("restricted: the section graph must be in the original frame");
    if (!(hgraph.grid == sol.graph.grid))
        throw ConfigError("restricted: section graph grid does not match the solution");
    sys_ = make_original_system(sol.h1->spec(), sol.eps);
    for (int k = 0; k < r_; ++k) {
        iq2_.push_back(hgraph.interp(hgraph.q2[k]));
        ip2_.push_back(hgraph.interp(hgraph.p2[k]));
    }
}

double RestrictedMap::omega0(double p1) const { return sol_.red->Omega(p1); }
double RestrictedMap::domega0(double p1) const { return sol_.red->dOmega(p1); }

Mat RestrictedMap::embedding_tangent(double q1, double p1) const {
    const int n = 1 + r_;
    const double h = cfg_.fd_h;
    Mat T = Mat::Zero(2 * n, 2);
    T(0, 0) = 1.0;
    T(n, 1) = 1.0;
    for (int k = 0; k < r_; ++k) {
        T(1 + k, 0) = (iq2_[k].eval(0.0, wrap01(q1 + h), p1) -
                       iq2_[k].eval(0.0, wrap01(q1 - h), p1)) / (2.0 * h);
        T(n + 1 + k, 0) = (ip2_[k].eval(0.0, wrap01(q1 + h), p1) -
                           ip2_[k].eval(0.0, wrap01(q1 - h), p1)) / (2.0 * h);
        T(1 + k, 1) = (iq2_[k].eval(0.0, q1, p1 + h) - iq2_[k].eval(0.0, q1, p1 - h)) /
                      (2.0 * h);
        T(n + 1 + k, 1) = (ip2_[k].eval(0.0, q1, p1 + h) - ip2_[k].eval(0.0, q1, p1 - h)) /
                          (2.0 * h);
    }
    return T;
}

RestrictedMap::Sample RestrictedMap::sample(double q1, double p1) const {
    const int n = 1 + r_;
    const double eps = sol_.eps;

    Vec z0(2 * n);
    z0[0] = q1;
    z0[n] = p1;
    for (int k = 0; k < r_; ++k) {
        z0[1 + k] = iq2_[k].eval(0.0, q1, p1);
        z0[n + 1 + k] = ip2_[k].eval(0.0, q1, p1);
    }

    Sample out;
    out.q1 = q1;
    out.p1 = p1;
    {
        Vec dz(2 * n);
        sys_.field(0.0, z0, dz);
        out.p1dot_scaled = std::abs(dz[n]) / (eps * eps);
    }

    FlowConfig fc;
    fc.step = cfg_.flow_step;
    fc.tangent = true;
    const FlowResult fr = time_one_map(sys_, z0, fc);
    if (!fr.drift_ok)
        throw NumericsError("restricted: energy drift survived all step halvings");

    out.q1_image = fr.state[0];
    out.p1_image = fr.state[n];

    const Mat TE = embedding_tangent(q1, p1);
    const Mat full = fr.jacobian * TE;
    out.dphi = Mat(2, 2);
    out.dphi.row(0) = full.row(0);
    out.dphi.row(1) = full.row(n);

    const Mat J = canonical_J(n);
    out.omega_here = TE.transpose() * J * TE;
    const Mat TEi = embedding_tangent(wrap01(out.q1_image), out.p1_image);
    out.omega_image = TEi.transpose() * J * TEi;

    for (int k = 0; k < r_; ++k) {
        const double q2g = iq2_[k].eval(0.0, wrap01(out.q1_image), out.p1_image);
        const double p2g = ip2_[k].eval(0.0, wrap01(out.q1_image), out.p1_image);
        out.normal_defect = std::max(out.normal_defect, std::abs(fr.state[1 + k] - q2g));
        out.normal_defect = std::max(out.normal_defect,
                                     std::abs(fr.state[n + 1 + k] - p2g));
    }
    return out;
}

RestrictedSweep analyze_restricted(const CylinderSolution& sol, const GraphFunction& hgraph,
                                   const RestrictedMapConfig& cfg) {
    const RestrictedMap map(sol, hgraph, cfg);
    const GridSpec& g = sol.graph.grid;
    const double center = 0.5 * (g.p_lo + g.p_hi);
    const double b0 = cfg.ball_fraction * 0.5 * (g.p_hi - g.p_lo);

    RestrictedSweep out;
    out.torsion_min = std::numeric_limits<double>::infinity();
    out.det_min = std::numeric_limits<double>::infinity();

    for (int j = 0; j < cfg.nq; ++j) {
        const double q1 = static_cast<double>(j) / cfg.nq;
        for (int k = 0; k < cfg.np; ++k) {
            const double p1 =
                center - b0 + 2.0 * b0 * static_cast<double>(k) / (cfg.np - 1);
            const RestrictedMap::Sample s = map.sample(q1, p1);

            const double qdev = std::abs(wrap_sym(s.q1_image - q1 - map.omega0(p1)));
            const double pdev = std::abs(s.p1_image - p1);
            out.phi_dev = std::max({out.phi_dev, qdev, pdev});

            Mat dphi0 = Mat::Identity(2, 2);
            dphi0(0, 1) = map.domega0(p1);
            out.dphi_dev = std::max(out.dphi_dev,
                                    (s.dphi - dphi0).cwiseAbs().maxCoeff());

            out.section_defect = std::max(out.section_defect, s.normal_defect);
            out.torsion_min = std::min(out.torsion_min, s.dphi(0, 1));
            out.p1dot_scaled = std::max(out.p1dot_scaled, s.p1dot_scaled);

            const Mat pulled = s.dphi.transpose() * s.omega_image * s.dphi;
            out.pullback_resid = std::max(out.pullback_resid,
                                          (pulled - s.omega_here).cwiseAbs().maxCoeff());
            const double det = s.omega_here(0, 1) * s.omega_here(1, 0) -
                               s.omega_here(0, 0) * s.omega_here(1, 1);
            out.det_min = std::min(out.det_min, std::abs(det));
        }
    }

    CertificateReport& rep = out.report;
    rep.name = "restricted-map";
    {
        std::ostringstream hs;
        hs << hgraph.scenario << "|eps=" << sol.eps << "|section=" << cfg.nq << "x" << cfg.np;
        rep.inputs_hash = fnv1a(hs.str());
    }
    rep.require_le("section-defect", out.section_defect, sol.cfg.tol_contain);
    rep.require_ge("torsion-min", out.torsion_min, 0.5);
    rep.require_le("pullback-residual", out.pullback_resid, 1e-6);
    rep.require_ge("form-det-min", out.det_min, 0.5);
    rep.require_le("dphi-deviation", out.dphi_dev, 0.1);
    rep.measured["phi-deviation"] = out.phi_dev;
    rep.measured["p1dot-scaled"] = out.p1dot_scaled;
    rep.note("time-one images of the section graph under the original flow; tangents pushed "
             "through the variational flow and projected back to the slow coordinates");
    return out;
}

}  // namespace nhc
