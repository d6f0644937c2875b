#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "otfs/channel.hpp"

#include <cstdio>
#include <filesystem>
#include <random>

using namespace otfs;

namespace {

ChannelRealization single_path(FrameGeometry geom, Complex gain, int delay, int doppler,
                               double frac = 0.0) {
    ChannelRealization ch;
    ch.geom = geom;
    ch.paths.push_back({gain, delay, doppler, frac});
    return ch;
}

}  // namespace

TEST_CASE("dense builder: hand-checked single-path cases") {
    const FrameGeometry geom{2, 2};

    SUBCASE("flat path is the identity") {
        const CMat h = build_time_channel_dense(single_path(geom, 1.0, 0, 0));
        CHECK((h - CMat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);
    }

    SUBCASE("pure delay is the cyclic shift") {
        const CMat h = build_time_channel_dense(single_path(geom, 1.0, 1, 0));
        for (int n = 0; n < 4; ++n) {
            for (int c = 0; c < 4; ++c) {
                const double want = (c == (n + 3) % 4) ? 1.0 : 0.0;
                CHECK(std::abs(h(n, c) - want) < 1e-15);
            }
        }
    }

    SUBCASE("pure integer Doppler is the modulation diagonal") {
        // One full cycle across the MN=4 samples: diag(1, j, -1, -j).
        const CMat h = build_time_channel_dense(single_path(geom, 1.0, 0, 1));
        const Complex expect[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        for (int n = 0; n < 4; ++n) {
            CHECK(std::abs(h(n, n) - expect[n]) < 1e-14);
            for (int c = 0; c < 4; ++c) {
                if (c != n) CHECK(std::abs(h(n, c)) < 1e-15);
            }
        }
    }

    SUBCASE("delay-Doppler path with fractional shift, written out directly") {
        const Complex gain(0.0, 1.0);
        const double nu = 1.5;  // doppler 1, fractional 0.5
        const CMat h = build_time_channel_dense(single_path(geom, gain, 1, 1, 0.5));
        for (int n = 0; n < 4; ++n) {
            const Complex want = gain * std::polar(1.0, 2.0 * M_PI * nu * (n - 1) / 4.0);
            CHECK(std::abs(h(n, (n + 3) % 4) - want) < 1e-14);
        }
    }
}

TEST_CASE("dense builder is additive over paths") {
    std::mt19937_64 rng(11);
    const FrameGeometry geom{4, 3};
    const ChannelRealization a = oracle::random_channel(geom, 1, rng);
    const ChannelRealization b = oracle::random_channel(geom, 1, rng);
    ChannelRealization both = a;
    both.paths.push_back(b.paths[0]);
    const CMat sum = build_time_channel_dense(a) + build_time_channel_dense(b);
    CHECK((build_time_channel_dense(both) - sum).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("block factorization embeds back to the dense matrix") {
    std::mt19937_64 rng(22);
    for (int rep = 0; rep < 60; ++rep) {
        const FrameGeometry geom{2 + int(rng() % 7), 2 + int(rng() % 7)};
        const int paths = 1 + int(rng() % 4);
        const ChannelRealization ch = oracle::random_channel(geom, paths, rng);
        const CMat dense = build_time_channel_dense(ch);
        const CMat embedded = oracle::embed_blocks(build_block_channel(ch));
        CHECK((dense - embedded).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("block factorization bookkeeping") {
    std::mt19937_64 rng(33);
    const FrameGeometry geom{4, 3};
    const BlockChannel blocks = build_block_channel(oracle::random_channel(geom, 3, rng));

    SUBCASE("stacked observation blocks are assembled from the right pieces") {
        for (int i = 0; i < geom.N; ++i) {
            const CMat& a = blocks.obs_blocks[i];
            REQUIRE(a.rows() == 2 * geom.M);
            REQUIRE(a.cols() == geom.M);
            CHECK((a.topRows(geom.M) - blocks.diag_blocks[i]).cwiseAbs().maxCoeff() == 0.0);
            CHECK((a.bottomRows(geom.M) - blocks.sub_blocks[(i + 1) % geom.N])
                      .cwiseAbs()
                      .maxCoeff() == 0.0);
        }
    }

    SUBCASE("interference matrix holds the two leakage blocks") {
        for (int i = 0; i < geom.N; ++i) {
            const CMat b = blocks.interference(i);
            CHECK((b.topLeftCorner(geom.M, geom.M) - blocks.sub_blocks[i])
                      .cwiseAbs()
                      .maxCoeff() == 0.0);
            CHECK((b.bottomRightCorner(geom.M, geom.M) -
                   blocks.diag_blocks[(i + 1) % geom.N])
                      .cwiseAbs()
                      .maxCoeff() == 0.0);
            CHECK(b.topRightCorner(geom.M, geom.M).cwiseAbs().maxCoeff() == 0.0);
            CHECK(b.bottomLeftCorner(geom.M, geom.M).cwiseAbs().maxCoeff() == 0.0);
        }
    }

    SUBCASE("zero delay leaves the sub-diagonal blocks empty") {
        const BlockChannel flat =
            build_block_channel(single_path(geom, Complex(0.3, -0.4), 0, 1, 0.25));
        for (int i = 0; i < geom.N; ++i) {
            CHECK(flat.sub_blocks[i].cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("delay-Doppler domain channel") {
    SUBCASE("flat path gives the identity on the grid") {
        const CMat h = build_dd_channel_dense(single_path({3, 4}, 1.0, 0, 0));
        CHECK((h - CMat::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("integer path permutes the grid with unit-magnitude weights") {
        const Complex gain(0.6, -0.8);
        const CMat h = build_dd_channel_dense(single_path({2, 4}, gain, 1, 1));
        for (int row = 0; row < 8; ++row) {
            int heavy = 0;
            for (int col = 0; col < 8; ++col) {
                if (std::abs(h(row, col)) > 1e-9) ++heavy;
            }
            CHECK(heavy == 1);
            CHECK(h.row(row).cwiseAbs().maxCoeff() == doctest::Approx(std::abs(gain)).epsilon(1e-10));
        }
    }

    SUBCASE("fractional Doppler spreads energy but keeps the Frobenius norm") {
        std::mt19937_64 rng(44);
        const FrameGeometry geom{3, 4};
        const ChannelRealization ch = oracle::random_channel(geom, 2, rng);
        const CMat h_dd = build_dd_channel_dense(ch);
        const CMat h_t = build_time_channel_dense(ch);
        CHECK(h_dd.norm() == doctest::Approx(h_t.norm()).epsilon(1e-12));
    }
}

TEST_CASE("sample_channel draws valid, reproducible realizations") {
    const FrameGeometry geom{16, 8};

    SUBCASE("deterministic given the seed") {
        const ChannelRealization a = sample_channel(geom, 4, 10, 3.5, 999);
        const ChannelRealization b = sample_channel(geom, 4, 10, 3.5, 999);
        REQUIRE(a.paths.size() == b.paths.size());
        for (std::size_t p = 0; p < a.paths.size(); ++p) {
            CHECK(a.paths[p].gain == b.paths[p].gain);
            CHECK(a.paths[p].delay == b.paths[p].delay);
            CHECK(a.paths[p].doppler == b.paths[p].doppler);
            CHECK(a.paths[p].doppler_frac == b.paths[p].doppler_frac);
        }
        const ChannelRealization c = sample_channel(geom, 4, 10, 3.5, 1000);
        CHECK(c.paths[0].gain != a.paths[0].gain);
    }

    SUBCASE("draws respect the advertised ranges") {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const ChannelRealization ch = sample_channel(geom, 4, 10, 3.5, seed);
            REQUIRE(ch.paths.size() == 4);
            CHECK(ch.paths[0].delay == 0);
            for (const ChannelPath& p : ch.paths) {
                CHECK(p.delay >= 0);
                CHECK(p.delay <= 10);
                CHECK(p.doppler_frac > -0.5);
                CHECK(p.doppler_frac <= 0.5);
                CHECK(std::abs(p.doppler_total()) <= 3.5 + 1e-12);
            }
        }
    }

    SUBCASE("integer mode never draws a fractional part") {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const ChannelRealization ch = sample_channel(geom, 3, 5, 2.9, seed, true);
            for (const ChannelPath& p : ch.paths) {
                CHECK(p.doppler_frac == 0.0);
                CHECK(std::abs(p.doppler) <= 2);
            }
        }
    }

    SUBCASE("average total path energy is one") {
        double acc = 0.0;
        const int draws = 400;
        for (int seed = 0; seed < draws; ++seed) {
            const ChannelRealization ch = sample_channel(geom, 4, 10, 3.5, 5000 + seed);
            for (const ChannelPath& p : ch.paths) acc += std::norm(p.gain);
        }
        CHECK(acc / draws == doctest::Approx(1.0).epsilon(0.2));
    }

    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(sample_channel(geom, 0, 4, 1.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(sample_channel(geom, 2, 16, 1.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(sample_channel(geom, 2, 4, -1.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(sample_channel(geom, 2, 4, 5.0, 1), std::invalid_argument);
    }
}

TEST_CASE("channel realizations reject out-of-contract paths") {
    const FrameGeometry geom{4, 4};
    CHECK_THROWS_AS(build_time_channel_dense(single_path(geom, 1.0, 4, 0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_block_channel(single_path(geom, 1.0, -1, 0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_block_channel(single_path(geom, 1.0, 0, 0, 0.75)),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_block_channel(single_path(geom, 1.0, 0, 0, -0.5)),
                    std::invalid_argument);
    ChannelRealization empty;
    empty.geom = geom;
    CHECK_THROWS_AS(build_block_channel(empty), std::invalid_argument);
}

TEST_CASE("JSON serialization round-trips exactly") {
    std::mt19937_64 rng(55);
    const ChannelRealization ch = oracle::random_channel({8, 4}, 3, rng);
    const ChannelRealization back = channel_from_json(channel_to_json(ch));
    REQUIRE(back.paths.size() == ch.paths.size());
    CHECK(back.geom.M == ch.geom.M);
    CHECK(back.geom.N == ch.geom.N);
    for (std::size_t p = 0; p < ch.paths.size(); ++p) {
        CHECK(back.paths[p].gain == ch.paths[p].gain);
        CHECK(back.paths[p].delay == ch.paths[p].delay);
        CHECK(back.paths[p].doppler == ch.paths[p].doppler);
        CHECK(back.paths[p].doppler_frac == ch.paths[p].doppler_frac);
    }

    CHECK_THROWS_AS(channel_from_json("{not json"), std::invalid_argument);
    CHECK_THROWS_AS(channel_from_json("{\"M\":2,\"N\":2,\"paths\":[]}"),
                    std::invalid_argument);
}

TEST_CASE("channel files save and load") {
    std::mt19937_64 rng(66);
    const ChannelRealization ch = oracle::random_channel({4, 4}, 2, rng);
    const std::string path =
        (std::filesystem::temp_directory_path() / "otfs_channel_roundtrip.json").string();
    save_channel(ch, path);
    const ChannelRealization back = load_channel(path);
    CHECK(back.paths.size() == ch.paths.size());
    CHECK(back.paths[0].gain == ch.paths[0].gain);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_channel("/nonexistent/nowhere.json"), std::runtime_error);
}
