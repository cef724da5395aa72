#pragma once

#include "nhcyl/types.hpp"

namespace nhc {

/** Unique symmetric positive definite square root; throws NumericsError if M is not SPD. */
Mat spd_sqrt(const Mat& M);

/** Symmetric part, for cleaning up products that are symmetric in exact arithmetic. */
Mat symmetrize(const Mat& M);

/**
 * The scaling matrix of the hyperbolic block: the unique SPD solution L of
 *
 *   L A L = L^{-1} B L^{-1},
 *
 * equivalently (L^2) A (L^2) = B. Computed through the geometric mean
 * L^2 = A^{-1/2} (A^{1/2} B A^{1/2})^{1/2} A^{-1/2}. With this L the matrix
 * D = L A L = L^{-1} B L^{-1} is SPD and the linearized slow block
 * (q2', p2') = (B p2, A q2) decouples in x = (L p2 + L^{-1} q2)/sqrt(2),
 * y = (L p2 - L^{-1} q2)/sqrt(2) into x' = D x, y' = -D y.
 */
Mat compute_L(const Mat& A, const Mat& B);

struct LinearBlockData {
    Mat L, Linv, D;
    /** Residuals of the defining equation and of the two expressions for D. */
    double eq_residual = 0.0;
    double conj_residual = 0.0;
    /** | T M T^{-1} - diag(D, -D) | for the sqrt(2)-normalized (x, y) change. */
    double block_diag_residual = 0.0;
    /** Gap between span{(q2, -L^{-2} q2)} and the stable eigenspace of [[0,B],[A,0]]. */
    double stable_space_gap = 0.0;
};

/**
 * Build L, L^{-1}, D from A = d^2 V(0)-type and B = d^2_{p2} h-type SPD blocks and
 * verify the conjugacy against a direct eigendecomposition of [[0, B], [A, 0]].
 */
LinearBlockData linear_block_check(const Mat& A, const Mat& B);

}  // namespace nhc
