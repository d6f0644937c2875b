#pragma once

#include "otfs/channel.hpp"
#include "otfs/modem.hpp"
#include "otfs/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace otfs {

struct DetectorConfig {
    int max_iters = 5;
    double damping = 0.0;   // 0 = off; d in [0,1) blends in the previous prior
    double stop_tol = 0.0;  // 0 = run all iterations; else stop when the
                            // mean update falls below this (relative change)
};

struct DetectionResult {
    CVec hard_symbols;                    // delay-Doppler grid decisions
    std::vector<std::uint8_t> hard_bits;  // Gray labels of hard_symbols
    std::vector<double> mse_per_iter;     // ||m_post - truth||^2 / (MN) when a
                                          // reference frame is supplied
    std::vector<double> post_var_per_iter;  // mean estimator posterior variance
    int iters_run = 0;
};

/*
 * Complex multiply-accumulate counter for the complexity benchmark. The
 * estimator entry points add the cost of every factorization, matrix
 * product, and triangular solve they perform, at the actual operand sizes:
 *   - rank-k Hermitian update (n x k operand): n(n+1)/2 * k
 *   - general product (m x k)(k x n): m*k*n
 *   - Cholesky of n x n: n^3/6
 *   - triangular solve, n x n against r right-hand sides: n^2/2 * r
 */
struct FlopLog {
    std::uint64_t cmacs = 0;

    void herk(std::uint64_t n, std::uint64_t k) { cmacs += n * (n + 1) / 2 * k; }
    void gemm(std::uint64_t m, std::uint64_t k, std::uint64_t n) { cmacs += m * k * n; }
    void cholesky(std::uint64_t n) { cmacs += n * n * n / 6; }
    void tri_solve(std::uint64_t n, std::uint64_t rhs) { cmacs += n * n / 2 * rhs; }
    void scale(std::uint64_t m, std::uint64_t n) { cmacs += m * n; }
};

/*
 * Banded block LMMSE with interference cancellation. For each block i the
 * stacked observation [r_i; r_{(i+1)%N}] sees the wanted block through
 * A_i = [H0_i; H1_{(i+1)%N}]; the neighbour blocks' residual uncertainty
 * (their prior means are cancelled, their variances stay) enters the Gram
 * matrix through the block-diagonal interference covariance. Per block:
 *
 *   G_i = A_i diag(v_i) A_i^H
 *         + diag(H1_i V_{i-1} H1_i^H, H0_{i+1} V_{i+1} H0_{i+1}^H) + n0 I
 *   m_post = m_i + C A_i^H G_i^{-1} (r~ - interference means - A_i m_i)
 *   v_post = v_i (1 - Re diag(C A_i^H G_i^{-1} A_i))
 *
 * Solved with a Cholesky factorization of G_i (2M x 2M); cost is O(M^3) per
 * block, O(M^3 N) per call. Posterior variances are clamped to
 * [kVarFloor, kVarCeil]. Requires N >= 2 (with a single block the wrap-around
 * tap folds onto the block itself and the banded model degenerates).
 */
GaussianMessage block_lmmse(const BlockChannel& blocks, const CVec& r,
                            const GaussianMessage& prior, double n0,
                            FlopLog* flops = nullptr);

// Textbook one-shot LMMSE on the dense MN x MN channel, same message
// conventions and clamping as block_lmmse. O((MN)^3). Baseline for accuracy
// and complexity comparisons.
GaussianMessage full_lmmse_baseline(const CMat& h_dense, const CVec& r,
                                    const GaussianMessage& prior, double n0,
                                    FlopLog* flops = nullptr);

/*
 * Extrinsic of a posterior with respect to the prior it consumed (Gaussian
 * division, per entry):
 *   v_e = 1 / (1/v_p - 1/v_a),  m_e = v_e (m_p/v_p - m_a/v_a).
 * If v_p >= v_a (no information gained) the division is degenerate: v_e is
 * set to kVarCeil and the mean passes through (m_e = m_p). Otherwise v_e is
 * clamped to [kVarFloor, kVarCeil] and the clamped value is used in m_e.
 */
GaussianMessage extrinsic(const GaussianMessage& post, const GaussianMessage& prior);

// Posterior of one symbol under prior CN(mean, var) and a uniform
// constellation: softmax weights w(a) oc exp(-|mean - a|^2 / var).
struct SymbolPosterior {
    Complex mean{0.0, 0.0};
    double var = 0.0;
    int hard = 0;  // index of the max-weight point
};
SymbolPosterior symbol_posterior(Complex mean, double var, const Constellation& c);

// Symbol-wise demap of a delay-Doppler message: per-entry softmax posterior
// plus max-weight hard decisions. Variances are clamped to
// [kVarFloor, kVarCeil].
struct DemapResult {
    GaussianMessage post;
    std::vector<int> hard;  // constellation point index per symbol
};
DemapResult dd_demap(const GaussianMessage& prior, const Constellation& c);

/*
 * One delay-Doppler-domain pass of the cross-domain schedule: carry the
 * time-domain extrinsic message across (means through the exact transform,
 * variances through the lane-averaging rule), apply `demap` on the grid,
 * carry the posterior back, and return its extrinsic against the incoming
 * message. With an identity demap and lane-uniform variances this is a
 * fixed point: the returned message equals the input.
 */
GaussianMessage dd_domain_pass(
    const GaussianMessage& ext_time, FrameGeometry geom,
    const std::function<GaussianMessage(const GaussianMessage&)>& demap);

/*
 * Cross-domain iterative detector: alternates the banded block LMMSE (time
 * domain) with the symbol-wise demap (delay-Doppler domain), exchanging
 * extrinsic messages in both directions. Starts from the uninformative
 * prior; runs cfg.max_iters rounds. When `truth_time` is supplied the
 * per-iteration estimator MSE against it is recorded.
 */
DetectionResult detect_cross_domain(const BlockChannel& blocks, const CVec& r,
                                    double n0, const Constellation& c,
                                    const DetectorConfig& cfg = {},
                                    const CVec* truth_time = nullptr,
                                    FlopLog* flops = nullptr);

// Same schedule with the full-size LMMSE in place of the banded estimator.
// The geometry tells the domain transforms how the MN entries split into
// lanes and blocks.
DetectionResult detect_cross_domain_full(const CMat& h_dense, FrameGeometry geom,
                                         const CVec& r, double n0,
                                         const Constellation& c,
                                         const DetectorConfig& cfg = {},
                                         const CVec* truth_time = nullptr,
                                         FlopLog* flops = nullptr);

/*
 * Exact maximum-likelihood frame decision by exhaustive enumeration of all
 * |alphabet|^(MN) delay-Doppler hypotheses against the dense time-domain
 * channel. Throws if the hypothesis count exceeds 2^20. Oracle for
 * small-frame validation only.
 */
CVec brute_force_map(const CMat& h_dense, const CVec& r, double n0,
                     const Constellation& c, FrameGeometry geom);

}  // namespace otfs
