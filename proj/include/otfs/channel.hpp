#pragma once

#include "otfs/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace otfs {

// One propagation path: complex gain, integer delay (in samples), and a
// Doppler shift split into an integer grid index plus a fractional
// remainder in (-0.5, 0.5], both in units of 1/(N*M*Ts).
struct ChannelPath {
    Complex gain{0.0, 0.0};
    int delay = 0;
    int doppler = 0;
    double doppler_frac = 0.0;

    double doppler_total() const { return static_cast<double>(doppler) + doppler_frac; }
};

struct ChannelRealization {
    FrameGeometry geom;
    std::vector<ChannelPath> paths;
};

/*
 * Banded block form of the time-domain channel under a reduced cyclic
 * prefix. With s and r split into N blocks of length M, the channel couples
 * each received block only to its own transmit block and the previous one:
 *
 *   r_i = diag_blocks[i] * s_i + sub_blocks[i] * s_{(i-1) mod N} + noise,
 *
 * where diag_blocks[i] holds the within-block part of each path's delay
 * shift and sub_blocks[i] the part that wraps across the block boundary
 * (block 0 wraps onto block N-1). Every block is M x M; sub_blocks[i] is
 * strictly upper-triangular with at most max-delay nonzero diagonals and is
 * identically zero when all delays are zero.
 */
struct BlockChannel {
    FrameGeometry geom;
    std::vector<CMat> diag_blocks;  // main-diagonal blocks, N of them
    std::vector<CMat> sub_blocks;   // first sub-diagonal blocks, N of them
    std::vector<CMat> obs_blocks;   // [diag_blocks[i]; sub_blocks[(i+1)%N]], 2M x M

    // 2M x 2M block-diagonal matrix diag(sub_blocks[i], diag_blocks[(i+1)%N]):
    // how blocks (i-1)%N and (i+1)%N leak into the stacked observation of
    // block i.
    CMat interference(int i) const;
};

/*
 * Draws a random P-path channel. Path 0 always has delay 0; the remaining
 * delays are uniform on {0, ..., max_delay}. Each path's Doppler is uniform
 * on [-max_doppler, max_doppler] and split into the nearest integer index
 * plus a fractional part in (-0.5, 0.5]; with integer_doppler set, only
 * integer shifts in {-floor(max_doppler), ..., floor(max_doppler)} are
 * drawn. Gains are i.i.d. CN(0, 1/P) so the expected total path energy is
 * one. Deterministic given the seed.
 */
ChannelRealization sample_channel(FrameGeometry geom, int num_paths, int max_delay,
                                  double max_doppler, std::uint64_t seed,
                                  bool integer_doppler = false);

// Dense MN x MN time-domain channel matrix: sum over paths of
// gain * phase * (Doppler diagonal) * (cyclic delay shift). Reference
// construction for tests, oracles, and the full-size baseline.
CMat build_time_channel_dense(const ChannelRealization& ch);

// Banded block factorization of the same operator (the production path).
BlockChannel build_block_channel(const ChannelRealization& ch);

// Dense effective channel seen on the delay-Doppler grid:
// (F_N kron I_M) H_time (F_N^H kron I_M).
CMat build_dd_channel_dense(const ChannelRealization& ch);

// JSON (de)serialization. Schema: {"M":..,"N":..,"paths":[{"re":..,"im":..,
// "l":..,"k":..,"kappa":..},...]}. Round-trips exactly at double precision.
std::string channel_to_json(const ChannelRealization& ch);
ChannelRealization channel_from_json(const std::string& text);
void save_channel(const ChannelRealization& ch, const std::string& path);
ChannelRealization load_channel(const std::string& path);

}  // namespace otfs
