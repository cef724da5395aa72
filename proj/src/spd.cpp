#include "nhcyl/spd.hpp"

#include <Eigen/Eigenvalues>

namespace nhc {

Mat symmetrize(const Mat& M) { return 0.5 * (M + M.transpose()); }

Mat spd_sqrt(const Mat& M) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(M));
    if (es.info() != Eigen::Success) throw NumericsError("spd_sqrt: eigensolver failed");
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw NumericsError("spd_sqrt: matrix is not positive definite");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

Mat compute_L(const Mat& A, const Mat& B) {
    const Mat Ah = spd_sqrt(A);
    const Mat Ahi = Ah.inverse();
    const Mat mid = spd_sqrt(symmetrize(Ah * B * Ah));
    const Mat L2 = symmetrize(Ahi * mid * Ahi);
    return spd_sqrt(L2);
}

LinearBlockData linear_block_check(const Mat& A, const Mat& B) {
    const int r = static_cast<int>(A.rows());
    LinearBlockData out;
    out.L = compute_L(A, B);
    out.Linv = out.L.inverse();
    out.D = symmetrize(out.L * A * out.L);

    const Mat L2 = out.L * out.L;
    out.eq_residual = (L2 * A * L2 - B).norm() / std::max(1.0, B.norm());
    out.conj_residual = (out.Linv * B * out.Linv - out.D).norm() / std::max(1.0, out.D.norm());

    // Stable space of (q2', p2') = (B p2, A q2): columns (q2, p2) = (v, -L^{-2} v).
    Mat M(2 * r, 2 * r);
    M.setZero();
    M.topRightCorner(r, r) = B;
    M.bottomLeftCorner(r, r) = A;

    // Conjugate by (x, y) = ((L p2 + L^{-1} q2)/sqrt2, (L p2 - L^{-1} q2)/sqrt2).
    const double s2 = 1.0 / std::sqrt(2.0);
    Mat T(2 * r, 2 * r), Ti(2 * r, 2 * r);
    T.topLeftCorner(r, r) = s2 * out.Linv;
    T.topRightCorner(r, r) = s2 * out.L;
    T.bottomLeftCorner(r, r) = -s2 * out.Linv;
    T.bottomRightCorner(r, r) = s2 * out.L;
    Ti.topLeftCorner(r, r) = s2 * out.L;
    Ti.topRightCorner(r, r) = -s2 * out.L;
    Ti.bottomLeftCorner(r, r) = s2 * out.Linv;
    Ti.bottomRightCorner(r, r) = s2 * out.Linv;
    Mat block = Mat::Zero(2 * r, 2 * r);
    block.topLeftCorner(r, r) = out.D;
    block.bottomRightCorner(r, r) = -out.D;
    out.block_diag_residual = (T * M * Ti - block).norm() / std::max(1.0, out.D.norm());
    Eigen::EigenSolver<Mat> es(M);
    Mat stable(2 * r, r);
    int filled = 0;
    for (int i = 0; i < 2 * r && filled < r; ++i) {
        if (es.eigenvalues()[i].real() < 0.0) {
            stable.col(filled++) = es.eigenvectors().col(i).real().normalized();
        }
    }
    if (filled != r) throw NumericsError("linear_block_check: stable space has wrong dimension");

    // Orthogonal projector onto the graph {p2 = -L^{-2} q2} and distance of the
    // eigenvectors from it.
    Mat basis(2 * r, r);
    basis.topRows(r) = Mat::Identity(r, r);
    basis.bottomRows(r) = -symmetrize(out.Linv * out.Linv);
    Eigen::HouseholderQR<Mat> qr(basis);
    Mat Q = qr.householderQ() * Mat::Identity(2 * r, r);
    Mat proj = Q * Q.transpose();
    out.stable_space_gap = ((Mat::Identity(2 * r, 2 * r) - proj) * stable).norm();
    return out;
}

}  // namespace nhc
