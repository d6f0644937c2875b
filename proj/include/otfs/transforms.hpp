#pragma once

#include "otfs/types.hpp"

namespace otfs {

// Unitary n-point DFT matrix: F[k, i] = exp(-j*2*pi*k*i/n) / sqrt(n).
CMat dft_matrix(int n);

/*
 * Domain transforms. A transmit frame x lives on the delay-Doppler grid and
 * is sent as the time-domain vector s = (F_N^H kron I_M) x: each delay lane
 * m is carried through a unitary inverse DFT across the N blocks. The
 * receiver-side map is the exact inverse, y = (F_N kron I_M) r. Both are
 * norm-preserving, and both are applied lane-wise (cost M*N^2 multiplies,
 * no MN x MN matrix is ever formed).
 */
CVec dd_to_time(const CVec& x, FrameGeometry geom);
CVec time_to_dd(const CVec& r, FrameGeometry geom);

/*
 * Variance counterparts for diagonal-covariance Gaussian messages. The exact
 * covariance of a transformed message is not diagonal; keeping the diagonal
 * model means each delay lane's variance is averaged over the N blocks and
 * replicated across that lane. The same rule applies in both directions and
 * preserves total variance. Lane-uniform variance profiles pass through
 * unchanged, which keeps the two directions mutually consistent.
 */
RVec variance_time_to_dd(const RVec& v, FrameGeometry geom);
RVec variance_dd_to_time(const RVec& v, FrameGeometry geom);

}  // namespace otfs
