#include "otfs/harness.hpp"

#include "otfs/rng.hpp"
#include "otfs/transforms.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace otfs {

namespace {

// Child-stream purposes hung off one (master, snr value, frame) triple.
constexpr std::uint64_t kStreamChannel = 1;
constexpr std::uint64_t kStreamData = 2;

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    return v[mid];
}

ChannelRealization frame_channel(const ExperimentSpec& spec,
                                 const ChannelRealization* fixed, double snr_db,
                                 std::uint64_t frame) {
    if (fixed) return *fixed;
    const std::uint64_t seed =
        child_seed(spec.seed, double_key(snr_db), frame, kStreamChannel);
    return sample_channel(spec.geom, spec.num_paths, spec.max_delay, spec.max_doppler,
                          seed, spec.integer_doppler);
}

void check_fixed_channel(const ExperimentSpec& spec, const ChannelRealization& ch) {
    if (ch.geom.M != spec.geom.M || ch.geom.N != spec.geom.N) {
        throw std::invalid_argument("channel file geometry does not match the experiment");
    }
}

}  // namespace

const char* detector_kind_name(DetectorKind k) {
    switch (k) {
        case DetectorKind::proposed: return "proposed";
        case DetectorKind::full_lmmse: return "full_lmmse";
        case DetectorKind::map_oracle: return "map_oracle";
    }
    throw std::logic_error("detector_kind_name: bad kind");
}

DetectorKind detector_kind_from_name(const std::string& name) {
    if (name == "proposed") return DetectorKind::proposed;
    if (name == "full_lmmse") return DetectorKind::full_lmmse;
    if (name == "map_oracle") return DetectorKind::map_oracle;
    throw std::invalid_argument("unknown detector: " + name);
}

std::string spec_to_json(const ExperimentSpec& spec) {
    nlohmann::json j;
    j["M"] = spec.geom.M;
    j["N"] = spec.geom.N;
    j["paths"] = spec.num_paths;
    j["max_delay"] = spec.max_delay;
    j["max_doppler"] = spec.max_doppler;
    j["integer_doppler"] = spec.integer_doppler;
    j["channel_file"] = spec.channel_file;
    j["constellation"] = spec.constellation;
    j["snr_db"] = spec.snr_db;
    j["detector"] = detector_kind_name(spec.detector);
    j["iters"] = spec.iters;
    j["frames"] = spec.frames;
    j["min_bit_errors"] = spec.min_bit_errors;
    j["seed"] = spec.seed;
    return j.dump(2) + "\n";
}

ExperimentSpec spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("experiment JSON: ") + e.what());
    }
    ExperimentSpec d;  // defaults
    ExperimentSpec spec;
    spec.geom.M = j.value("M", d.geom.M);
    spec.geom.N = j.value("N", d.geom.N);
    spec.num_paths = j.value("paths", d.num_paths);
    spec.max_delay = j.value("max_delay", d.max_delay);
    spec.max_doppler = j.value("max_doppler", d.max_doppler);
    spec.integer_doppler = j.value("integer_doppler", d.integer_doppler);
    spec.channel_file = j.value("channel_file", d.channel_file);
    spec.constellation = j.value("constellation", d.constellation);
    spec.snr_db = j.value("snr_db", d.snr_db);
    spec.detector = detector_kind_from_name(
        j.value("detector", std::string(detector_kind_name(d.detector))));
    spec.iters = j.value("iters", d.iters);
    spec.frames = j.value("frames", d.frames);
    spec.min_bit_errors = j.value("min_bit_errors", d.min_bit_errors);
    spec.seed = j.value("seed", d.seed);
    return spec;
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_spec: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return spec_from_json(buf.str());
}

std::vector<RunRecord> run_ber_sweep(const ExperimentSpec& spec) {
    spec.geom.validate();
    if (spec.frames < 1) throw std::invalid_argument("run_ber_sweep: frames must be >= 1");
    if (spec.snr_db.empty()) throw std::invalid_argument("run_ber_sweep: empty SNR grid");

    const Constellation c = Constellation::by_name(spec.constellation);
    ChannelRealization fixed;
    const bool has_fixed = !spec.channel_file.empty();
    if (has_fixed) {
        fixed = load_channel(spec.channel_file);
        check_fixed_channel(spec, fixed);
    }

    DetectorConfig cfg;
    cfg.max_iters = spec.iters;

    std::vector<RunRecord> records;
    for (const double snr : spec.snr_db) {
        const double n0 = snr_to_n0(snr);
        RunRecord rec;
        rec.snr_db = snr;
        rec.detector = spec.detector;
        rec.iters = spec.iters;

        for (int f = 0; f < spec.frames; ++f) {
            const ChannelRealization ch =
                frame_channel(spec, has_fixed ? &fixed : nullptr, snr, f);
            const BlockChannel blocks = build_block_channel(ch);

            std::mt19937_64 data_rng(
                child_seed(spec.seed, double_key(snr), f, kStreamData));
            const TxFrame tx = make_frame(spec.geom, c, data_rng);
            const CVec r = apply_channel(tx.s_time, blocks, n0, data_rng);

            CVec hard_symbols;
            std::vector<std::uint8_t> hard_bits;
            switch (spec.detector) {
                case DetectorKind::proposed: {
                    const DetectionResult res = detect_cross_domain(blocks, r, n0, c, cfg);
                    hard_symbols = res.hard_symbols;
                    hard_bits = res.hard_bits;
                    break;
                }
                case DetectorKind::full_lmmse: {
                    const CMat h = build_time_channel_dense(ch);
                    const DetectionResult res =
                        detect_cross_domain_full(h, spec.geom, r, n0, c, cfg);
                    hard_symbols = res.hard_symbols;
                    hard_bits = res.hard_bits;
                    break;
                }
                case DetectorKind::map_oracle: {
                    const CMat h = build_time_channel_dense(ch);
                    hard_symbols = brute_force_map(h, r, n0, c, spec.geom);
                    hard_bits = demap_hard(hard_symbols, c);
                    break;
                }
            }

            for (std::size_t b = 0; b < tx.bits.size(); ++b) {
                rec.bit_errors += (tx.bits[b] != hard_bits[b]);
            }
            for (int m = 0; m < spec.geom.size(); ++m) {
                rec.symbol_errors += (hard_symbols(m) != tx.x_dd(m));
            }
            rec.bits += tx.bits.size();
            rec.symbols += spec.geom.size();
            rec.frames += 1;

            if (spec.min_bit_errors > 0 &&
                rec.bit_errors >= static_cast<std::uint64_t>(spec.min_bit_errors)) {
                break;
            }
        }
        records.push_back(rec);
    }
    return records;
}

MseTrace run_mse_trace(const ExperimentSpec& spec) {
    spec.geom.validate();
    if (spec.channel_file.empty()) {
        throw std::invalid_argument("run_mse_trace: a fixed channel file is required");
    }
    if (spec.snr_db.empty()) throw std::invalid_argument("run_mse_trace: empty SNR grid");
    if (spec.frames < 1) throw std::invalid_argument("run_mse_trace: frames must be >= 1");

    const Constellation c = Constellation::by_name(spec.constellation);
    const ChannelRealization ch = load_channel(spec.channel_file);
    check_fixed_channel(spec, ch);
    const BlockChannel blocks = build_block_channel(ch);

    const double snr = spec.snr_db.front();
    const double n0 = snr_to_n0(snr);

    DetectorConfig cfg;
    cfg.max_iters = spec.iters;
    cfg.stop_tol = 0.0;  // every frame must contribute all iterations

    MseTrace trace;
    trace.snr_db = snr;
    trace.mc_mse.assign(spec.iters, 0.0);
    std::vector<double> sq(spec.iters, 0.0);
    const int steps = spec.iters > 1 ? spec.iters - 1 : 0;
    trace.mc_step_mean.assign(steps, 0.0);
    std::vector<double> step_sq(steps, 0.0);
    for (int f = 0; f < spec.frames; ++f) {
        std::mt19937_64 data_rng(child_seed(spec.seed, double_key(snr), f, kStreamData));
        const TxFrame tx = make_frame(spec.geom, c, data_rng);
        const CVec r = apply_channel(tx.s_time, blocks, n0, data_rng);

        const DetectionResult res =
            detect_cross_domain(blocks, r, n0, c, cfg, &tx.s_time);
        for (int l = 0; l < spec.iters; ++l) {
            trace.mc_mse[l] += res.mse_per_iter[l];
            sq[l] += res.mse_per_iter[l] * res.mse_per_iter[l];
        }
        for (int l = 0; l < steps; ++l) {
            const double d = res.mse_per_iter[l + 1] - res.mse_per_iter[l];
            trace.mc_step_mean[l] += d;
            step_sq[l] += d * d;
        }
    }
    const auto finish = [&](std::vector<double>& mean, std::vector<double>& sumsq,
                            std::vector<double>& out_stderr) {
        out_stderr.assign(mean.size(), 0.0);
        for (std::size_t l = 0; l < mean.size(); ++l) {
            mean[l] /= spec.frames;
            const double var = std::max(0.0, sumsq[l] / spec.frames - mean[l] * mean[l]);
            out_stderr[l] = std::sqrt(var / spec.frames);
        }
    };
    finish(trace.mc_mse, sq, trace.mc_mse_stderr);
    finish(trace.mc_step_mean, step_sq, trace.mc_step_stderr);

    for (const SeVariant variant : {SeVariant::exact, SeVariant::tin, SeVariant::genie}) {
        trace.se.push_back(run_state_evolution(blocks, n0, c, spec.iters, variant));
    }
    return trace;
}

BenchResult run_complexity_bench(const ExperimentSpec& spec) {
    spec.geom.validate();
    if (spec.frames < 1) throw std::invalid_argument("run_complexity_bench: frames must be >= 1");
    if (spec.snr_db.empty()) throw std::invalid_argument("run_complexity_bench: empty SNR grid");

    const Constellation c = Constellation::by_name(spec.constellation);
    const double snr = spec.snr_db.front();
    const double n0 = snr_to_n0(snr);

    ChannelRealization fixed;
    const bool has_fixed = !spec.channel_file.empty();
    if (has_fixed) {
        fixed = load_channel(spec.channel_file);
        check_fixed_channel(spec, fixed);
    }

    BenchResult bench;
    bench.geom = spec.geom;
    bench.frames = spec.frames;

    std::vector<double> block_ms, full_ms;
    double sink = 0.0;
    for (int f = 0; f < spec.frames; ++f) {
        const ChannelRealization ch =
            frame_channel(spec, has_fixed ? &fixed : nullptr, snr, f);
        const BlockChannel blocks = build_block_channel(ch);
        const CMat h = build_time_channel_dense(ch);

        std::mt19937_64 data_rng(child_seed(spec.seed, double_key(snr), f, kStreamData));
        const TxFrame tx = make_frame(spec.geom, c, data_rng);
        const CVec r = apply_channel(tx.s_time, blocks, n0, data_rng);
        const GaussianMessage prior = GaussianMessage::uninformative(spec.geom.size());

        using clock = std::chrono::steady_clock;
        FlopLog block_log, full_log;

        const auto t0 = clock::now();
        const GaussianMessage pb = block_lmmse(blocks, r, prior, n0,
                                               f == 0 ? &block_log : nullptr);
        const auto t1 = clock::now();
        const GaussianMessage pf = full_lmmse_baseline(h, r, prior, n0,
                                                       f == 0 ? &full_log : nullptr);
        const auto t2 = clock::now();

        block_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        full_ms.push_back(std::chrono::duration<double, std::milli>(t2 - t1).count());
        sink += pb.var.sum() + pf.var.sum();

        if (f == 0) {
            bench.block_cmacs = block_log.cmacs;
            bench.full_cmacs = full_log.cmacs;
        }
    }
    if (!(sink >= 0.0)) throw std::runtime_error("run_complexity_bench: invalid results");

    bench.block_median_ms = median_of(block_ms);
    bench.full_median_ms = median_of(full_ms);
    return bench;
}

std::string ber_csv(const std::vector<RunRecord>& records) {
    std::string out = "snr_db,detector,iters,bits,bit_errors,ber\n";
    char line[256];
    for (const RunRecord& r : records) {
        std::snprintf(line, sizeof(line), "%.12g,%s,%d,%llu,%llu,%.12g\n", r.snr_db,
                      detector_kind_name(r.detector), r.iters,
                      static_cast<unsigned long long>(r.bits),
                      static_cast<unsigned long long>(r.bit_errors), r.ber());
        out += line;
    }
    return out;
}

std::string mse_csv(const MseTrace& trace) {
    std::string out = "variant,iter,mse\n";
    char line[128];
    for (std::size_t l = 0; l < trace.mc_mse.size(); ++l) {
        std::snprintf(line, sizeof(line), "mc,%zu,%.12g\n", l + 1, trace.mc_mse[l]);
        out += line;
    }
    for (const StateTrajectory& tr : trace.se) {
        for (int l = 0; l < tr.iters(); ++l) {
            std::snprintf(line, sizeof(line), "%s,%d,%.12g\n", se_variant_name(tr.variant),
                          l + 1, tr.v_p_time[l]);
            out += line;
        }
    }
    return out;
}

std::string bench_csv(const BenchResult& bench) {
    std::string out = "detector,M,N,median_ms_per_iter,flops_est\n";
    char line[256];
    std::snprintf(line, sizeof(line), "proposed,%d,%d,%.12g,%llu\n", bench.geom.M,
                  bench.geom.N, bench.block_median_ms,
                  static_cast<unsigned long long>(bench.block_cmacs));
    out += line;
    std::snprintf(line, sizeof(line), "full_lmmse,%d,%d,%.12g,%llu\n", bench.geom.M,
                  bench.geom.N, bench.full_median_ms,
                  static_cast<unsigned long long>(bench.full_cmacs));
    out += line;
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_text_file: cannot open " + path);
    out << text;
    if (!out) throw std::runtime_error("write_text_file: write failed for " + path);
}

}  // namespace otfs
