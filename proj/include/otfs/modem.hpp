#pragma once

#include "otfs/channel.hpp"
#include "otfs/types.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace otfs {

/*
 * Unit-average-energy symbol alphabet with Gray bit labels. A point's index
 * equals its bit label read MSB-first, so mapping consumes bits_per_symbol
 * bits per symbol and demapping emits them back in the same order.
 *
 * QPSK: bits (b0, b1) -> ((1 - 2*b0) + j*(1 - 2*b1)) / sqrt(2), i.e. the
 * first bit selects the real sign and the second the imaginary sign.
 * BPSK: bit 0 -> +1, bit 1 -> -1.
 */
struct Constellation {
    std::string name;
    std::vector<Complex> points;
    int bits_per_symbol = 1;

    static Constellation qpsk();
    static Constellation bpsk();
    static Constellation by_name(const std::string& name);  // "qpsk" | "bpsk"

    int order() const { return static_cast<int>(points.size()); }
    int nearest(Complex z) const;
};

std::vector<std::uint8_t> random_bits(int n, std::mt19937_64& rng);

// bits.size() must be a multiple of bits_per_symbol.
CVec map_bits(const std::vector<std::uint8_t>& bits, const Constellation& c);

// Per-point bit labels for a vector of point indices, MSB-first.
std::vector<std::uint8_t> bits_of_indices(const std::vector<int>& idx, const Constellation& c);

// Minimum-distance hard demap straight to bits.
std::vector<std::uint8_t> demap_hard(const CVec& symbols, const Constellation& c);

// Es/N0 in dB -> complex noise variance N0 (unit symbol energy assumed).
double snr_to_n0(double es_over_n0_db);

// Pushes the time-domain frame s through the banded channel and adds
// circularly-symmetric complex AWGN with variance n0 per sample.
CVec apply_channel(const CVec& s, const BlockChannel& blocks, double n0,
                   std::mt19937_64& rng);

// One transmit frame: payload bits, the delay-Doppler symbol grid, and the
// time-domain samples actually sent.
struct TxFrame {
    std::vector<std::uint8_t> bits;
    CVec x_dd;
    CVec s_time;
};

TxFrame make_frame(FrameGeometry geom, const Constellation& c, std::mt19937_64& rng);

}  // namespace otfs
