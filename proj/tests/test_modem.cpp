#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "otfs/modem.hpp"
#include "otfs/transforms.hpp"

#include <random>

using namespace otfs;

TEST_CASE("QPSK alphabet: unit energy, pinned Gray labels") {
    const Constellation c = Constellation::qpsk();
    REQUIRE(c.order() == 4);
    CHECK(c.bits_per_symbol == 2);

    double energy = 0.0;
    for (const Complex& p : c.points) energy += std::norm(p);
    CHECK(energy / c.order() == doctest::Approx(1.0).epsilon(1e-14));

    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(c.points[0b00] - Complex(r, r)) < 1e-15);
    CHECK(std::abs(c.points[0b01] - Complex(r, -r)) < 1e-15);
    CHECK(std::abs(c.points[0b10] - Complex(-r, r)) < 1e-15);
    CHECK(std::abs(c.points[0b11] - Complex(-r, -r)) < 1e-15);

    // Gray property: flipping one sign flips exactly one label bit.
    auto hamming = [](int a, int b) { return __builtin_popcount(a ^ b); };
    CHECK(hamming(0b00, 0b10) == 1);  // real sign
    CHECK(hamming(0b01, 0b11) == 1);
    CHECK(hamming(0b00, 0b01) == 1);  // imaginary sign
    CHECK(hamming(0b10, 0b11) == 1);
}

TEST_CASE("BPSK alphabet") {
    const Constellation c = Constellation::bpsk();
    REQUIRE(c.order() == 2);
    CHECK(c.bits_per_symbol == 1);
    CHECK(c.points[0] == Complex(1.0, 0.0));
    CHECK(c.points[1] == Complex(-1.0, 0.0));
    CHECK(Constellation::by_name("bpsk").name == "bpsk");
    CHECK_THROWS_AS(Constellation::by_name("qam64"), std::invalid_argument);
}

TEST_CASE("bit mapping round-trips and rejects bad input") {
    std::mt19937_64 rng(7);
    for (const Constellation& c : {Constellation::qpsk(), Constellation::bpsk()}) {
        const std::vector<std::uint8_t> bits = random_bits(30 * c.bits_per_symbol, rng);
        const CVec x = map_bits(bits, c);
        REQUIRE(x.size() == 30);
        const std::vector<std::uint8_t> back = demap_hard(x, c);
        CHECK(back == bits);
    }

    const Constellation q = Constellation::qpsk();
    CHECK_THROWS_AS(map_bits(std::vector<std::uint8_t>{1}, q), std::invalid_argument);
    CHECK_THROWS_AS(map_bits(std::vector<std::uint8_t>{1, 2}, q), std::invalid_argument);
    CHECK_THROWS_AS(bits_of_indices({4}, q), std::invalid_argument);
}

TEST_CASE("nearest-point decisions") {
    const Constellation q = Constellation::qpsk();
    CHECK(q.nearest(Complex(0.9, 0.8)) == 0b00);
    CHECK(q.nearest(Complex(0.1, -2.0)) == 0b01);
    CHECK(q.nearest(Complex(-0.3, 0.01)) == 0b10);
    CHECK(q.nearest(Complex(-1.0, -0.2)) == 0b11);
}

TEST_CASE("snr conversion assumes unit symbol energy") {
    CHECK(snr_to_n0(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(snr_to_n0(10.0) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(snr_to_n0(20.0) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(snr_to_n0(-3.0) == doctest::Approx(1.9952623150).epsilon(1e-9));
}

TEST_CASE("random_bits is reproducible and roughly balanced") {
    std::mt19937_64 a(42), b(42);
    const auto bits_a = random_bits(4000, a);
    const auto bits_b = random_bits(4000, b);
    CHECK(bits_a == bits_b);
    int ones = 0;
    for (std::uint8_t bit : bits_a) ones += bit;
    CHECK(ones > 1800);
    CHECK(ones < 2200);
}

TEST_CASE("apply_channel matches the dense operator") {
    std::mt19937_64 rng(99);
    const FrameGeometry geom{4, 3};
    const ChannelRealization ch = oracle::random_channel(geom, 3, rng);
    const BlockChannel blocks = build_block_channel(ch);
    const CMat dense = build_time_channel_dense(ch);

    SUBCASE("noiseless output is exactly H s") {
        for (int rep = 0; rep < 10; ++rep) {
            const CVec s = oracle::random_cvec(geom.size(), rng);
            std::mt19937_64 noise_rng(1);
            const CVec r = apply_channel(s, blocks, 0.0, noise_rng);
            CHECK((r - dense * s).cwiseAbs().maxCoeff() < 1e-12);
        }
    }

    SUBCASE("noise has the requested variance") {
        const CVec zero = CVec::Zero(geom.size());
        std::mt19937_64 noise_rng(2);
        double acc = 0.0;
        const int reps = 4000;
        for (int rep = 0; rep < reps; ++rep) {
            acc += apply_channel(zero, blocks, 0.5, noise_rng).squaredNorm();
        }
        CHECK(acc / (reps * geom.size()) == doctest::Approx(0.5).epsilon(0.05));
    }

    SUBCASE("reproducible for a fixed generator state") {
        const CVec s = oracle::random_cvec(geom.size(), rng);
        std::mt19937_64 g1(123), g2(123);
        const CVec r1 = apply_channel(s, blocks, 0.25, g1);
        const CVec r2 = apply_channel(s, blocks, 0.25, g2);
        CHECK((r1 - r2).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("input validation") {
        std::mt19937_64 g(1);
        CHECK_THROWS_AS(apply_channel(CVec::Zero(5), blocks, 0.1, g),
                        std::invalid_argument);
        CHECK_THROWS_AS(apply_channel(CVec::Zero(geom.size()), blocks, -0.1, g),
                        std::domain_error);
    }
}

TEST_CASE("make_frame ties bits, grid, and time samples together") {
    std::mt19937_64 rng(1234);
    const FrameGeometry geom{4, 4};
    const Constellation c = Constellation::qpsk();
    const TxFrame f = make_frame(geom, c, rng);
    REQUIRE(static_cast<int>(f.bits.size()) == geom.size() * c.bits_per_symbol);
    REQUIRE(f.x_dd.size() == geom.size());
    REQUIRE(f.s_time.size() == geom.size());
    CHECK((f.x_dd - map_bits(f.bits, c)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((f.s_time - dd_to_time(f.x_dd, geom)).cwiseAbs().maxCoeff() == 0.0);
    // Unitary transform keeps the frame energy at one per symbol.
    CHECK(f.s_time.squaredNorm() == doctest::Approx(geom.size()).epsilon(1e-12));
}
