#include "otfs/modem.hpp"

#include "otfs/transforms.hpp"

#include <cmath>
#include <limits>

namespace otfs {

Constellation Constellation::qpsk() {
    Constellation c;
    c.name = "qpsk";
    c.bits_per_symbol = 2;
    const double s = 1.0 / std::sqrt(2.0);
    // Index = Gray label (b0 b1): b0 flips the real sign, b1 the imaginary.
    c.points = {Complex(s, s), Complex(s, -s), Complex(-s, s), Complex(-s, -s)};
    return c;
}

Constellation Constellation::bpsk() {
    Constellation c;
    c.name = "bpsk";
    c.bits_per_symbol = 1;
    c.points = {Complex(1.0, 0.0), Complex(-1.0, 0.0)};
    return c;
}

Constellation Constellation::by_name(const std::string& name) {
    if (name == "qpsk") return qpsk();
    if (name == "bpsk") return bpsk();
    throw std::invalid_argument("unknown constellation: " + name);
}

int Constellation::nearest(Complex z) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int a = 0; a < order(); ++a) {
        const double d = std::norm(z - points[a]);
        if (d < best_d) {
            best_d = d;
            best = a;
        }
    }
    return best;
}

std::vector<std::uint8_t> random_bits(int n, std::mt19937_64& rng) {
    if (n < 0) throw std::invalid_argument("random_bits: negative count");
    std::vector<std::uint8_t> bits(n);
    std::uniform_int_distribution<int> coin(0, 1);
    for (auto& b : bits) b = static_cast<std::uint8_t>(coin(rng));
    return bits;
}

CVec map_bits(const std::vector<std::uint8_t>& bits, const Constellation& c) {
    const int bps = c.bits_per_symbol;
    if (bits.size() % bps != 0) {
        throw std::invalid_argument("map_bits: bit count not a multiple of bits per symbol");
    }
    const int n_sym = static_cast<int>(bits.size()) / bps;
    CVec x(n_sym);
    for (int s = 0; s < n_sym; ++s) {
        int idx = 0;
        for (int j = 0; j < bps; ++j) {
            const std::uint8_t b = bits[s * bps + j];
            if (b > 1) throw std::invalid_argument("map_bits: bits must be 0 or 1");
            idx = (idx << 1) | b;
        }
        x(s) = c.points[idx];
    }
    return x;
}

std::vector<std::uint8_t> bits_of_indices(const std::vector<int>& idx, const Constellation& c) {
    const int bps = c.bits_per_symbol;
    std::vector<std::uint8_t> bits(idx.size() * bps);
    for (std::size_t s = 0; s < idx.size(); ++s) {
        if (idx[s] < 0 || idx[s] >= c.order()) {
            throw std::invalid_argument("bits_of_indices: point index out of range");
        }
        for (int j = 0; j < bps; ++j) {
            bits[s * bps + j] = static_cast<std::uint8_t>((idx[s] >> (bps - 1 - j)) & 1);
        }
    }
    return bits;
}

std::vector<std::uint8_t> demap_hard(const CVec& symbols, const Constellation& c) {
    std::vector<int> idx(symbols.size());
    for (Eigen::Index s = 0; s < symbols.size(); ++s) idx[s] = c.nearest(symbols(s));
    return bits_of_indices(idx, c);
}

double snr_to_n0(double es_over_n0_db) {
    return std::pow(10.0, -es_over_n0_db / 10.0);
}

CVec apply_channel(const CVec& s, const BlockChannel& blocks, double n0,
                   std::mt19937_64& rng) {
    const FrameGeometry geom = blocks.geom;
    if (s.size() != geom.size()) throw std::invalid_argument("apply_channel: length mismatch");
    if (n0 < 0.0) throw std::domain_error("apply_channel: negative noise variance");

    const int m_sz = geom.M;
    CVec r(geom.size());
    for (int i = 0; i < geom.N; ++i) {
        const int prev = (i - 1 + geom.N) % geom.N;
        r.segment(i * m_sz, m_sz) = blocks.diag_blocks[i] * s.segment(i * m_sz, m_sz) +
                                    blocks.sub_blocks[i] * s.segment(prev * m_sz, m_sz);
    }
    if (n0 > 0.0) {  // n0 == 0 is the noiseless case and draws nothing
        std::normal_distribution<double> noise(0.0, std::sqrt(n0 / 2.0));
        for (Eigen::Index n = 0; n < r.size(); ++n) {
            const double re = noise(rng);
            const double im = noise(rng);
            r(n) += Complex(re, im);
        }
    }
    return r;
}

TxFrame make_frame(FrameGeometry geom, const Constellation& c, std::mt19937_64& rng) {
    geom.validate();
    TxFrame f;
    f.bits = random_bits(geom.size() * c.bits_per_symbol, rng);
    f.x_dd = map_bits(f.bits, c);
    f.s_time = dd_to_time(f.x_dd, geom);
    return f;
}

}  // namespace otfs
