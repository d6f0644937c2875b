// Command-line front end: BER sweeps, fixed-channel MSE traces with
// state-evolution predictions, and the block-vs-full complexity benchmark.

#include "otfs/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

namespace {

// One set of experiment flags, attached to every subcommand. Flags that were
// actually passed override the config file (or the built-in defaults).
struct SpecOptions {
    std::string config;
    std::uint64_t seed = 0;
    int iters = 0;
    int frames = 0;
    std::vector<double> snr;
    std::string detector;
    std::string constellation;
    std::string channel;
    int m = 0, n = 0;
    int paths = 0;
    int max_delay = -1;
    double max_doppler = -1.0;
    bool integer_doppler = false;
    int min_errors = -1;

    CLI::Option* seed_opt = nullptr;
    CLI::Option* iters_opt = nullptr;
    CLI::Option* frames_opt = nullptr;
    CLI::Option* snr_opt = nullptr;
    CLI::Option* detector_opt = nullptr;
    CLI::Option* constellation_opt = nullptr;
    CLI::Option* channel_opt = nullptr;
    CLI::Option* m_opt = nullptr;
    CLI::Option* n_opt = nullptr;
    CLI::Option* paths_opt = nullptr;
    CLI::Option* max_delay_opt = nullptr;
    CLI::Option* max_doppler_opt = nullptr;
    CLI::Option* integer_doppler_opt = nullptr;
    CLI::Option* min_errors_opt = nullptr;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config, "Experiment config JSON file");
        seed_opt = cmd->add_option("--seed", seed, "Master seed");
        iters_opt = cmd->add_option("--iters", iters, "Detector iterations");
        frames_opt = cmd->add_option("--frames", frames, "Monte Carlo frames");
        snr_opt = cmd->add_option("--snr", snr, "Es/N0 grid in dB (comma separated)")
                      ->delimiter(',');
        detector_opt = cmd->add_option("--detector", detector,
                                       "proposed | full_lmmse | map_oracle");
        constellation_opt =
            cmd->add_option("--constellation", constellation, "qpsk | bpsk");
        channel_opt = cmd->add_option("--channel", channel, "Fixed channel JSON file");
        m_opt = cmd->add_option("-M", m, "Delay bins per block");
        n_opt = cmd->add_option("-N", n, "Doppler bins / blocks");
        paths_opt = cmd->add_option("--paths", paths, "Number of channel paths");
        max_delay_opt = cmd->add_option("--max-delay", max_delay, "Largest path delay");
        max_doppler_opt =
            cmd->add_option("--max-doppler", max_doppler, "Largest path Doppler");
        integer_doppler_opt = cmd->add_flag("--integer-doppler", integer_doppler,
                                            "Draw integer Doppler shifts only");
        min_errors_opt = cmd->add_option("--min-errors", min_errors,
                                         "Stop an SNR point after this many bit errors");
    }

    otfs::ExperimentSpec resolve() const {
        otfs::ExperimentSpec spec;
        if (!config.empty()) spec = otfs::load_spec(config);
        if (seed_opt->count()) spec.seed = seed;
        if (iters_opt->count()) spec.iters = iters;
        if (frames_opt->count()) spec.frames = frames;
        if (snr_opt->count()) spec.snr_db = snr;
        if (detector_opt->count()) spec.detector = otfs::detector_kind_from_name(detector);
        if (constellation_opt->count()) spec.constellation = constellation;
        if (channel_opt->count()) spec.channel_file = channel;
        if (m_opt->count()) spec.geom.M = m;
        if (n_opt->count()) spec.geom.N = n;
        if (paths_opt->count()) spec.num_paths = paths;
        if (max_delay_opt->count()) spec.max_delay = max_delay;
        if (max_doppler_opt->count()) spec.max_doppler = max_doppler;
        if (integer_doppler_opt->count()) spec.integer_doppler = integer_doppler;
        if (min_errors_opt->count()) spec.min_bit_errors = min_errors;
        return spec;
    }
};

int run_ber(const SpecOptions& opts, const std::string& out_path) {
    const otfs::ExperimentSpec spec = opts.resolve();
    const std::vector<otfs::RunRecord> records = otfs::run_ber_sweep(spec);
    otfs::write_text_file(out_path, otfs::ber_csv(records));
    for (const otfs::RunRecord& r : records) {
        std::printf("snr %6.2f dB  %-10s  ber %.6g  (%llu/%llu bits, %llu frames)\n",
                    r.snr_db, otfs::detector_kind_name(r.detector), r.ber(),
                    static_cast<unsigned long long>(r.bit_errors),
                    static_cast<unsigned long long>(r.bits),
                    static_cast<unsigned long long>(r.frames));
    }
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int run_mse(const SpecOptions& opts, const std::string& out_path,
            const std::string& states_path) {
    const otfs::ExperimentSpec spec = opts.resolve();
    const otfs::MseTrace trace = otfs::run_mse_trace(spec);
    otfs::write_text_file(out_path, otfs::mse_csv(trace));
    otfs::write_text_file(states_path, otfs::trajectories_csv(trace.se));
    std::printf("snr %.2f dB, %d iterations, %d frames\n", trace.snr_db, spec.iters,
                spec.frames);
    for (std::size_t l = 0; l < trace.mc_mse.size(); ++l) {
        std::printf("iter %2zu  mc %.6g", l + 1, trace.mc_mse[l]);
        for (const otfs::StateTrajectory& tr : trace.se) {
            std::printf("  %s %.6g", otfs::se_variant_name(tr.variant), tr.v_p_time[l]);
        }
        std::printf("\n");
    }
    std::printf("wrote %s and %s\n", out_path.c_str(), states_path.c_str());
    return 0;
}

int run_bench(const SpecOptions& opts, const std::string& out_path) {
    const otfs::ExperimentSpec spec = opts.resolve();
    const otfs::BenchResult bench = otfs::run_complexity_bench(spec);
    otfs::write_text_file(out_path, otfs::bench_csv(bench));
    std::printf("M=%d N=%d, %d frames\n", bench.geom.M, bench.geom.N, bench.frames);
    std::printf("banded block pass: median %.3f ms, %llu cmacs\n", bench.block_median_ms,
                static_cast<unsigned long long>(bench.block_cmacs));
    std::printf("full-size pass:    median %.3f ms, %llu cmacs\n", bench.full_median_ms,
                static_cast<unsigned long long>(bench.full_cmacs));
    std::printf("wall-time ratio (full/block):        %.2f\n", bench.wall_ratio());
    std::printf("counted ratio vs one block solve:    %.1f\n", bench.unit_flop_ratio());
    std::printf("counted ratio per frame pass:        %.1f\n", bench.frame_flop_ratio());
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-domain iterative detection simulator for OTFS frames"};
    app.require_subcommand(1);

    CLI::App* ber = app.add_subcommand("ber", "Monte Carlo BER sweep over an SNR grid");
    SpecOptions ber_opts;
    ber_opts.attach(ber);
    std::string ber_out = "ber.csv";
    ber->add_option("--out", ber_out, "Output CSV path");

    CLI::App* mse = app.add_subcommand(
        "mse-trace", "Per-iteration MSE on a fixed channel vs. state evolution");
    SpecOptions mse_opts;
    mse_opts.attach(mse);
    std::string mse_out = "mse.csv";
    std::string states_out = "se_states.csv";
    mse->add_option("--out", mse_out, "Output CSV path");
    mse->add_option("--states-out", states_out, "State-evolution trajectory CSV path");

    CLI::App* bench = app.add_subcommand(
        "bench", "Wall-time and counted-complexity comparison of the two estimators");
    SpecOptions bench_opts;
    bench_opts.attach(bench);
    std::string bench_out = "bench.csv";
    bench->add_option("--out", bench_out, "Output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ber->parsed()) return run_ber(ber_opts, ber_out);
        if (mse->parsed()) return run_mse(mse_opts, mse_out, states_out);
        if (bench->parsed()) return run_bench(bench_opts, bench_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
