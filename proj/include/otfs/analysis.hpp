#pragma once

#include "otfs/channel.hpp"
#include "otfs/modem.hpp"
#include "otfs/types.hpp"

#include <string>
#include <vector>

namespace otfs {

/*
 * Deterministic state-evolution prediction of the detector's per-iteration
 * MSE, tracking one scalar variance per message:
 *
 *   exact: neighbour-block interference enters the per-block Gram matrix
 *          with the current prior variance (matches the detector),
 *   tin:   interference kept at full symbol energy every iteration
 *          (treat-interference-as-noise; worst case),
 *   genie: interference removed entirely (perfect cancellation; best case).
 */
enum class SeVariant { exact, tin, genie };

const char* se_variant_name(SeVariant v);

struct StateTrajectory {
    SeVariant variant = SeVariant::exact;
    // Entry l holds the states of iteration l+1, in schedule order.
    std::vector<double> v_a_time;  // estimator input variance
    std::vector<double> v_p_time;  // estimator posterior variance
    std::vector<double> v_a_dd;    // demapper input variance
    std::vector<double> v_p_dd;    // demapper posterior variance

    int iters() const { return static_cast<int>(v_a_time.size()); }
};

/*
 * Predicted estimator posterior variance for a given input variance: the
 * per-block LMMSE error traces averaged over the frame,
 *   v_p = v_a - (v_a^2 / MN) * sum_i trace(A_i^H G_i^{-1} A_i),
 * where G_i carries the interference term selected by `variant`. Clamped
 * like the detector's posterior.
 */
double se_posterior_time(double v_a_time, const BlockChannel& blocks, double n0,
                         SeVariant variant = SeVariant::exact);

/*
 * Predicted demapper posterior variance: the expected symbol-wise posterior
 * variance when the true symbol is observed through the scalar surrogate
 * channel m = x + CN(0, v_a_dd), x uniform on the constellation. Evaluated
 * with a tensorized Gauss-Hermite rule (quad_points nodes per real
 * dimension); the integrand is the same symbol_posterior the detector runs,
 * so clamping behaviour carries over.
 */
double se_demapper(double v_a_dd, const Constellation& c, int quad_points = 64);

// Full recursion over `iters` rounds, mirroring the detector's schedule and
// extrinsic/clamping rules. Starts from the uninformative variance.
StateTrajectory run_state_evolution(const BlockChannel& blocks, double n0,
                                    const Constellation& c, int iters,
                                    SeVariant variant = SeVariant::exact);

// CSV with header variant,iter,v_a_time,v_p_time,v_a_dd,v_p_dd.
std::string trajectories_csv(const std::vector<StateTrajectory>& trajs);

}  // namespace otfs
