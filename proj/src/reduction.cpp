#include "nhcyl/reduction.hpp"

#include <Eigen/Eigenvalues>

namespace nhc {

MatrixFamily::MatrixFamily(std::shared_ptr<const SplineBasis> basis,
                           std::vector<Mat> node_values)
    : basis_(std::move(basis)), nodes_(std::move(node_values)) {
    if (nodes_.empty() || static_cast<int>(nodes_.size()) != basis_->size())
        throw ConfigError("reduction: matrix family needs one value per knot");
    rows_ = static_cast<int>(nodes_[0].rows());
    cols_ = static_cast<int>(nodes_[0].cols());
    const int nk = basis_->size();
    std::vector<double> chan(nk);
    entries_.reserve(static_cast<std::size_t>(rows_) * cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) {
            for (int k = 0; k < nk; ++k) chan[k] = nodes_[k](i, j);
            entries_.emplace_back(basis_, chan);
        }
}

Mat MatrixFamily::value(double p1) const {
    Mat M(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) M(i, j) = entries_[i * cols_ + j].eval(p1);
    return M;
}

Mat MatrixFamily::derivative(double p1) const {
    Mat M(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) M(i, j) = entries_[i * cols_ + j].deriv(p1);
    return M;
}

Mat MatrixFamily::derivative_node(int k) const {
    Mat M(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) M(i, j) = entries_[i * cols_ + j].deriv_at_node(k);
    return M;
}

ReductionData::ReductionData(const AveragedData& avg, std::vector<double> p1_nodes) {
    const HamiltonianSpec& spec = avg.spec();
    if (spec.m != 1)
        throw ConfigError(
            "reduction: the graph machinery keys its momentum axis on one fast angle "
            "(m = 1); higher m is only supported by the linear algebra layer");
    r_ = spec.r;
    basis_ = std::make_shared<SplineBasis>(std::move(p1_nodes));
    const int nk = basis_->size();
    const Mat& A = avg.A();

    std::vector<Mat> Ls, Lis, Ds, P2s, Oms;
    Ls.reserve(nk);
    a_ = std::numeric_limits<double>::infinity();
    for (int k = 0; k < nk; ++k) {
        Vec p1(1);
        p1[0] = basis_->knots()[k];
        const Mat B = avg.B(p1);
        Mat Lk = compute_L(A, B);
        Mat L2 = Lk * Lk;
        eq_residual_ = std::max(eq_residual_, (L2 * A * L2 - B).norm());
        Mat Dk = symmetrize(Lk * A * Lk);
        Eigen::SelfAdjointEigenSolver<Mat> es(Dk);
        a_ = std::min(a_, es.eigenvalues().minCoeff());
        Ls.push_back(Lk);
        Lis.push_back(Lk.inverse());
        Ds.push_back(Dk);
        P2s.push_back(avg.P2(p1));
        Mat Om(1, 1);
        Om(0, 0) = avg.Omega0(p1)[0];
        Oms.push_back(Om);
    }
    L_ = MatrixFamily(basis_, std::move(Ls));
    Linv_ = MatrixFamily(basis_, std::move(Lis));
    D_ = MatrixFamily(basis_, std::move(Ds));
    P2_ = MatrixFamily(basis_, std::move(P2s));
    Om_ = MatrixFamily(basis_, std::move(Oms));

    for (int k = 0; k < nk; ++k)
        dOm_norm_ = std::max(dOm_norm_, std::abs(Om_.derivative_node(k)(0, 0)));
    alpha_ = std::min(0.5, 0.5 * a_ / std::max(dOm_norm_, 1e-12));
    b_ = alpha_ * dOm_norm_;
}

void ReductionData::to_xy(double p1, double eps, const Vec& q2, const Vec& p2, Vec& x,
                          Vec& y) const {
    const Mat Lp = L(p1);
    const Mat Li = Linv(p1);
    const Vec core = Lp * (p2 - P2t(p1));
    const Vec wing = eps * (Li * q2);
    x = core + wing;
    y = core - wing;
}

void ReductionData::from_xy(double p1, double eps, const Vec& x, const Vec& y, Vec& q2,
                            Vec& p2) const {
    q2 = L(p1) * (x - y) / (2.0 * eps);
    p2 = P2t(p1) + Linv(p1) * (x + y) * 0.5;
}

void ReductionData::to_xy_node(int k, double eps, const Vec& q2, const Vec& p2, Vec& x,
                               Vec& y) const {
    const Vec core = L_.node(k) * (p2 - P2t_node(k));
    const Vec wing = eps * (Linv_.node(k) * q2);
    x = core + wing;
    y = core - wing;
}

void ReductionData::from_xy_node(int k, double eps, const Vec& x, const Vec& y, Vec& q2,
                                 Vec& p2) const {
    q2 = L_.node(k) * (x - y) / (2.0 * eps);
    p2 = P2t_node(k) + Linv_.node(k) * (x + y) * 0.5;
}

CertificateReport linear_block_certificate(const Mat& A, const Mat& B, double tol) {
    CertificateReport rep;
    rep.name = "linear-block";
    LinearBlockData data = linear_block_check(A, B);
    rep.require_le("defining_eq_residual", data.eq_residual, tol);
    rep.require_le("D_two_forms_residual", data.conj_residual, tol);
    rep.require_le("block_diag_residual", data.block_diag_residual, tol);
    rep.require_le("stable_space_gap", data.stable_space_gap, tol);
    Eigen::SelfAdjointEigenSolver<Mat> es(data.D);
    rep.measured["D_min_eig"] = es.eigenvalues().minCoeff();
    rep.measured["D_max_eig"] = es.eigenvalues().maxCoeff();
    rep.note("stable space of the (q2, p2) block matches {p2 = -L^{-2} q2}");
    return rep;
}

}  // namespace nhc
