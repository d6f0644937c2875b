#include "otfs/channel.hpp"

#include "otfs/transforms.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace otfs {

namespace {

void validate_realization(const ChannelRealization& ch) {
    ch.geom.validate();
    if (ch.paths.empty()) throw std::invalid_argument("channel: needs at least one path");
    for (const ChannelPath& p : ch.paths) {
        if (p.delay < 0 || p.delay >= ch.geom.M) {
            throw std::invalid_argument("channel: path delay must lie in [0, M)");
        }
        if (!(p.doppler_frac > -0.5) || !(p.doppler_frac <= 0.5)) {
            throw std::invalid_argument("channel: fractional Doppler must lie in (-0.5, 0.5]");
        }
    }
}

// Per-path coupling coefficient for absolute time index n = i*M + m and
// delay l: gain * exp(-j*2*pi*nu*l/(MN)) * exp(j*2*pi*n*nu/(MN)), where nu
// is the path's total Doppler. Shared by the dense and the block builders
// so the two constructions agree to the last bit.
Complex path_coeff(const ChannelPath& p, int n, int frame_size) {
    const double nu = p.doppler_total();
    const double ang =
        2.0 * std::numbers::pi * nu * (static_cast<double>(n) - p.delay) / frame_size;
    return p.gain * Complex(std::cos(ang), std::sin(ang));
}

}  // namespace

ChannelRealization sample_channel(FrameGeometry geom, int num_paths, int max_delay,
                                  double max_doppler, std::uint64_t seed,
                                  bool integer_doppler) {
    geom.validate();
    if (num_paths < 1) throw std::invalid_argument("sample_channel: num_paths must be >= 1");
    if (max_delay < 0 || max_delay >= geom.M) {
        throw std::invalid_argument("sample_channel: max_delay must lie in [0, M)");
    }
    if (max_doppler < 0.0 || max_doppler > geom.N / 2.0) {
        throw std::invalid_argument("sample_channel: max_doppler must lie in [0, N/2]");
    }

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> delay_dist(0, max_delay);
    std::uniform_real_distribution<double> doppler_dist(-max_doppler, max_doppler);
    std::uniform_int_distribution<int> doppler_int_dist(
        -static_cast<int>(std::floor(max_doppler)), static_cast<int>(std::floor(max_doppler)));
    std::normal_distribution<double> gain_dist(0.0, std::sqrt(0.5 / num_paths));

    ChannelRealization ch;
    ch.geom = geom;
    ch.paths.resize(num_paths);
    for (int p = 0; p < num_paths; ++p) {
        ChannelPath& path = ch.paths[p];
        // Path 0 is the synchronization reference and always has delay 0.
        path.delay = (p == 0) ? 0 : delay_dist(rng);
        if (integer_doppler) {
            path.doppler = doppler_int_dist(rng);
            path.doppler_frac = 0.0;
        } else {
            const double nu = doppler_dist(rng);
            long k = std::lround(nu);
            double frac = nu - static_cast<double>(k);
            if (frac <= -0.5) {  // keep the remainder in (-0.5, 0.5]
                k -= 1;
                frac += 1.0;
            }
            path.doppler = static_cast<int>(k);
            path.doppler_frac = frac;
        }
        const double re = gain_dist(rng);
        const double im = gain_dist(rng);
        path.gain = Complex(re, im);
    }
    return ch;
}

CMat build_time_channel_dense(const ChannelRealization& ch) {
    validate_realization(ch);
    const int size = ch.geom.size();
    CMat h = CMat::Zero(size, size);
    for (const ChannelPath& p : ch.paths) {
        for (int n = 0; n < size; ++n) {
            const int col = (n - p.delay + size) % size;  // cyclic delay shift
            h(n, col) += path_coeff(p, n, size);
        }
    }
    return h;
}

BlockChannel build_block_channel(const ChannelRealization& ch) {
    validate_realization(ch);
    const int m_sz = ch.geom.M;
    const int n_blocks = ch.geom.N;
    const int size = ch.geom.size();

    BlockChannel blocks;
    blocks.geom = ch.geom;
    blocks.diag_blocks.assign(n_blocks, CMat::Zero(m_sz, m_sz));
    blocks.sub_blocks.assign(n_blocks, CMat::Zero(m_sz, m_sz));

    for (const ChannelPath& p : ch.paths) {
        for (int i = 0; i < n_blocks; ++i) {
            for (int m = 0; m < m_sz; ++m) {
                const Complex c = path_coeff(p, i * m_sz + m, size);
                if (m >= p.delay) {
                    // Delay shift stays inside the block.
                    blocks.diag_blocks[i](m, m - p.delay) += c;
                } else {
                    // Delay shift wraps onto the previous block's tail.
                    blocks.sub_blocks[i](m, m + m_sz - p.delay) += c;
                }
            }
        }
    }

    blocks.obs_blocks.resize(n_blocks);
    for (int i = 0; i < n_blocks; ++i) {
        CMat a(2 * m_sz, m_sz);
        a.topRows(m_sz) = blocks.diag_blocks[i];
        a.bottomRows(m_sz) = blocks.sub_blocks[(i + 1) % n_blocks];
        blocks.obs_blocks[i] = std::move(a);
    }
    return blocks;
}

CMat BlockChannel::interference(int i) const {
    const int m_sz = geom.M;
    const int n_blocks = geom.N;
    CMat b = CMat::Zero(2 * m_sz, 2 * m_sz);
    b.topLeftCorner(m_sz, m_sz) = sub_blocks[i];
    b.bottomRightCorner(m_sz, m_sz) = diag_blocks[(i + 1) % n_blocks];
    return b;
}

CMat build_dd_channel_dense(const ChannelRealization& ch) {
    const CMat h_time = build_time_channel_dense(ch);
    const int size = ch.geom.size();
    CMat h_dd(size, size);
    CVec unit = CVec::Zero(size);
    for (int c = 0; c < size; ++c) {
        unit(c) = 1.0;
        h_dd.col(c) = time_to_dd(h_time * dd_to_time(unit, ch.geom), ch.geom);
        unit(c) = 0.0;
    }
    return h_dd;
}

std::string channel_to_json(const ChannelRealization& ch) {
    validate_realization(ch);
    nlohmann::json j;
    j["M"] = ch.geom.M;
    j["N"] = ch.geom.N;
    j["paths"] = nlohmann::json::array();
    for (const ChannelPath& p : ch.paths) {
        j["paths"].push_back({{"re", p.gain.real()},
                              {"im", p.gain.imag()},
                              {"l", p.delay},
                              {"k", p.doppler},
                              {"kappa", p.doppler_frac}});
    }
    return j.dump(2) + "\n";
}

ChannelRealization channel_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("channel JSON: ") + e.what());
    }
    ChannelRealization ch;
    ch.geom.M = j.at("M").get<int>();
    ch.geom.N = j.at("N").get<int>();
    for (const auto& jp : j.at("paths")) {
        ChannelPath p;
        p.gain = Complex(jp.at("re").get<double>(), jp.at("im").get<double>());
        p.delay = jp.at("l").get<int>();
        p.doppler = jp.at("k").get<int>();
        p.doppler_frac = jp.at("kappa").get<double>();
        ch.paths.push_back(p);
    }
    validate_realization(ch);
    return ch;
}

void save_channel(const ChannelRealization& ch, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_channel: cannot open " + path);
    out << channel_to_json(ch);
    if (!out) throw std::runtime_error("save_channel: write failed for " + path);
}

ChannelRealization load_channel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_channel: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return channel_from_json(buf.str());
}

}  // namespace otfs
