#pragma once

#include <complex>
#include <memory>

#include "nhcyl/spline.hpp"
#include "nhcyl/types.hpp"

namespace nhc {

/**
 * In-place discrete Fourier transform, radix-2 when the length is a power of two,
 * direct O(N^2) summation otherwise. Forward is unscaled; inverse divides by N.
 */
void fourier_transform(std::vector<std::complex<double>>& a, bool inverse);

/**
 * Two-dimensional transform of an n0 x n1 row-major slab, done as 1D passes over
 * rows then columns; bin (a0, a1) sits at index a0 * n1 + a1. Forward is unscaled;
 * inverse divides by n0 * n1.
 */
void fourier_transform_2d(std::vector<std::complex<double>>& a, int n0, int n1, bool inverse);

/**
 * Two-dimensional spectral representation of a real function on the torus, sampled
 * on an nt x nq lattice, with evaluation anywhere and exact spectral derivatives.
 * The Nyquist mode (even sizes) is evaluated as a pure cosine and dropped from
 * derivatives; all fields handled here are spectrally converged well below that
 * mode, so the choice never surfaces above rounding level.
 */
struct Spectral2 {
    int nt = 0, nq = 0;
    std::vector<std::complex<double>> c;  // (kt index * nq + kq index), scaled by 1/(nt nq)

    /** values laid out row-major: values[it * nq + iq] = f(it/nt, iq/nq). */
    static Spectral2 analyze(int nt, int nq, std::span<const double> values);
    void synthesize(std::span<double> values) const;

    double eval(double t, double q) const;
    Spectral2 derivative_t() const;
    Spectral2 derivative_q() const;
    /** Largest |coefficient| with max(|kt|, |kq|) >= cut (spectral tail diagnostic). */
    double tail_magnitude(int cut) const;
};

/** Tensor grid over (t in T, q1 in T, p1 in [p_lo, p_hi]); nodes uniform in each axis. */
struct GridSpec {
    int nt = 32, nq = 32, np = 33;
    double p_lo = -0.2, p_hi = 0.2;

    double t_node(int i) const { return static_cast<double>(i) / nt; }
    double q_node(int j) const { return static_cast<double>(j) / nq; }
    double p_node(int k) const {
        return p_lo + (p_hi - p_lo) * static_cast<double>(k) / (np - 1);
    }
    double p_step() const { return (p_hi - p_lo) / (np - 1); }
    std::vector<double> p_nodes() const;
    std::size_t count() const {
        return static_cast<std::size_t>(nt) * nq * np;
    }
    bool operator==(const GridSpec&) const = default;
};

/** One scalar field on a GridSpec; p-columns are contiguous in memory. */
class GridScalar {
public:
    GridScalar() = default;
    explicit GridScalar(const GridSpec& g) : g_(g), v_(g.count(), 0.0) {}

    const GridSpec& grid() const { return g_; }
    double& at(int it, int iq, int ip) {
        return v_[(static_cast<std::size_t>(it) * g_.nq + iq) * g_.np + ip];
    }
    double at(int it, int iq, int ip) const {
        return v_[(static_cast<std::size_t>(it) * g_.nq + iq) * g_.np + ip];
    }
    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }

    void slice_p(int ip, std::vector<double>& out) const;
    void set_slice_p(int ip, std::span<const double> in);
    /** Contiguous p-column at fixed angles. */
    std::span<const double> p_column(int it, int iq) const {
        return {v_.data() + (static_cast<std::size_t>(it) * g_.nq + iq) * g_.np,
                static_cast<std::size_t>(g_.np)};
    }

    double max_abs() const;
    /** Max over nodes with ip in [ip_lo, ip_hi] (inner momentum window). */
    double max_abs_inner(int ip_lo, int ip_hi) const;

private:
    GridSpec g_;
    std::vector<double> v_;
};

/** Node partial derivatives: spectral in (t, q1), spline in p1. */
struct NodeDerivs {
    double dt = 0.0, dq = 0.0, dp = 0.0;
};

/**
 * Interpolating view of a GridScalar: trigonometric in (t, q1) through per-p-node
 * spectra, cubic spline across p1. Construction costs the FFTs once; each eval costs
 * np spectral evaluations plus one spline fit.
 */
class GridInterp {
public:
    GridInterp() = default;
    GridInterp(const GridScalar& f, std::shared_ptr<const SplineBasis> basis);

    double eval(double t, double q, double p) const;

private:
    GridSpec g_;
    std::vector<Spectral2> slices_;
    std::shared_ptr<const SplineBasis> basis_;
};

/**
 * The cylinder graph over (t, q1, p1): slow coordinates (q2, p2) per node, and the
 * same graph in the scaled hyperbolic coordinates (X, Y) used by the solver. The
 * frame records which Hamiltonian's phase coordinates q2/p2 live in ("H1" for the
 * averaged normal form, "H" after the momentum shear is undone).
 */
struct GraphFunction {
    GridSpec grid;
    int m = 1, r = 1;
    std::string scenario;
    std::string frame = "H1";
    double eps = 0.0, delta = 0.0, alpha = 0.0;

    std::vector<GridScalar> q2, p2;  // r components each
    std::vector<GridScalar> X, Y;    // r components each; may be empty after import
    std::shared_ptr<const SplineBasis> basis;

    void allocate();
    /** Max over nodes and components of |X|, |Y| (the scaled C0 norm). */
    double xy_c0_norm() const;
    GridInterp interp(const GridScalar& f) const {
        return GridInterp(f, basis);
    }
};

/**
 * Writes <stem>.json (header) and <stem>.csv (one row per node, columns
 * t, q1, p1, q2..., p2..., printf %.17g) under dir. Deterministic byte output.
 */
void save_graph(const GraphFunction& g, const std::string& dir, const std::string& stem);

/** Rebuilds the graph from disk; X, Y are left empty (derivable from the scenario). */
GraphFunction load_graph(const std::string& dir, const std::string& stem);

}  // namespace nhc
