#pragma once

#include "otfs/analysis.hpp"
#include "otfs/detector.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace otfs {

enum class DetectorKind { proposed, full_lmmse, map_oracle };

const char* detector_kind_name(DetectorKind k);
DetectorKind detector_kind_from_name(const std::string& name);

/*
 * One experiment description. Serializable to/from JSON so runs are
 * reproducible from a config file; every field has a CLI override. A
 * non-empty channel_file pins the channel for every frame; otherwise each
 * frame draws a fresh random channel from its own child stream.
 */
struct ExperimentSpec {
    FrameGeometry geom{64, 32};
    int num_paths = 4;
    int max_delay = 10;
    double max_doppler = 5.0;
    bool integer_doppler = false;
    std::string channel_file;
    std::string constellation = "qpsk";
    std::vector<double> snr_db{12.0};
    DetectorKind detector = DetectorKind::proposed;
    int iters = 5;
    int frames = 100;
    // Per SNR point, stop early once this many bit errors have accumulated
    // (0 = always run all frames).
    int min_bit_errors = 0;
    std::uint64_t seed = 1;
};

std::string spec_to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const std::string& text);
ExperimentSpec load_spec(const std::string& path);

// Error counts for one (SNR, detector) cell of a sweep.
struct RunRecord {
    double snr_db = 0.0;
    DetectorKind detector = DetectorKind::proposed;
    int iters = 0;
    std::uint64_t frames = 0;
    std::uint64_t bits = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t symbols = 0;
    std::uint64_t symbol_errors = 0;

    double ber() const { return bits ? static_cast<double>(bit_errors) / bits : 0.0; }
    double ser() const { return symbols ? static_cast<double>(symbol_errors) / symbols : 0.0; }
};

/*
 * Monte Carlo BER sweep. Frames are mutually independent: every (SNR value,
 * frame index) pair derives its own child streams for the channel, the
 * payload bits, and the noise, so results are reproducible bit for bit for
 * a given master seed regardless of which SNR points are run.
 */
std::vector<RunRecord> run_ber_sweep(const ExperimentSpec& spec);

// Per-iteration MSE trace on a fixed channel (spec.channel_file required),
// averaged over spec.frames noise/payload realizations, next to the three
// state-evolution predictions for the same channel. Uses snr_db[0].
struct MseTrace {
    double snr_db = 0.0;
    std::vector<double> mc_mse;         // Monte Carlo mean, entry l = iteration l+1
    std::vector<double> mc_mse_stderr;  // standard error of each mean
    std::vector<double> mc_step_mean;   // mean per-frame MSE change, iter l+1 -> l+2
    std::vector<double> mc_step_stderr;  // its standard error (paired across frames)
    std::vector<StateTrajectory> se;     // exact, tin, genie
};

MseTrace run_mse_trace(const ExperimentSpec& spec);

// Median wall time per estimator call and counted complexity at the spec's
// frame size, banded block estimator vs. full-size baseline.
struct BenchResult {
    FrameGeometry geom;
    int frames = 0;
    double block_median_ms = 0.0;   // one banded pass over the frame
    double full_median_ms = 0.0;    // one dense pass over the frame
    std::uint64_t block_cmacs = 0;  // counted, per frame pass
    std::uint64_t full_cmacs = 0;   // counted, per frame pass

    double wall_ratio() const { return block_median_ms > 0 ? full_median_ms / block_median_ms : 0.0; }
    // Full-frame dense pass vs. a single block solve (the banded scheme's
    // repeated unit of work).
    double unit_flop_ratio() const {
        return block_cmacs ? static_cast<double>(full_cmacs) * geom.N / static_cast<double>(block_cmacs) : 0.0;
    }
    // Aggregate per-frame ratio (all N block solves counted together).
    double frame_flop_ratio() const {
        return block_cmacs ? static_cast<double>(full_cmacs) / static_cast<double>(block_cmacs) : 0.0;
    }
};

BenchResult run_complexity_bench(const ExperimentSpec& spec);

// CSV renderers. Numbers are printed with %.12g, so identical runs produce
// byte-identical files.
std::string ber_csv(const std::vector<RunRecord>& records);
std::string mse_csv(const MseTrace& trace);
std::string bench_csv(const BenchResult& bench);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace otfs
