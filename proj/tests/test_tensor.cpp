#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "lpc/error.hpp"
#include "lpc/tensor.hpp"
#include "oracles.hpp"

using namespace lpc;

namespace {

FeatureTensor counting_tensor(std::size_t C, std::size_t H, std::size_t W) {
    FeatureTensor t(C, H, W);
    for (std::size_t i = 0; i < t.size(); ++i) t.values()[i] = static_cast<float>(i) * 0.25f - 3.0f;
    return t;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("lpc_test_" + name);
}

}  // namespace

TEST_CASE("square layout picks the smallest square grid") {
    const auto L = square_layout(256, 64, 64);
    CHECK(L.tile_rows == 16);
    CHECK(L.tile_cols == 16);
    CHECK(L.mosaic_height() == 1024);
    const auto odd = square_layout(5, 8, 4);
    CHECK(odd.tile_rows * odd.tile_cols >= 5);
    CHECK(odd.tile_cols == 3);
    CHECK(odd.original_channels == 5);
}

TEST_CASE("tile places channel k at tile (k / cols, k % cols)") {
    const auto t = counting_tensor(4, 2, 3);
    const Mosaic m = tile(t);
    REQUIRE(m.grid.rows() == 4);
    REQUIRE(m.grid.cols() == 6);
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t r = 0; r < 2; ++r)
            for (std::size_t c = 0; c < 3; ++c)
                CHECK(m.grid((k / 2) * 2 + r, (k % 2) * 3 + c) == t.at(k, r, c));
}

TEST_CASE("tile and untile round trip exactly, including padded layouts") {
    for (std::size_t C : {1u, 3u, 5u, 16u, 17u}) {
        const auto t = counting_tensor(C, 8, 4);
        const Mosaic m = tile(t);
        CHECK(untile(m) == t);
        const MaskGrid cov = channel_coverage(m.layout);
        std::size_t covered = 0;
        for (auto v : cov) covered += v;
        CHECK(covered == C * 8 * 4);
        for (std::size_t i = 0; i < cov.size(); ++i)
            if (!cov[i]) CHECK(m.grid[i] == 0.0);
    }
}

TEST_CASE("mosaic validation rejects mismatched geometry") {
    Mosaic m{RealGrid(8, 8), square_layout(4, 4, 3)};
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    CHECK_THROWS_AS(untile(m), std::invalid_argument);
}

TEST_CASE("untile_mask follows the tensor layout") {
    const auto L = square_layout(4, 2, 2);
    MaskGrid mask(4, 4, 0);
    mask(2, 3) = 1;  // channel 3, row 0, col 1
    const auto v = untile_mask(mask, L);
    REQUIRE(v.size() == 16);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == (i == (3 * 2 + 0) * 2 + 1));
}

TEST_CASE("quantization uses global min and max and rounds half away from zero") {
    RealGrid g(1, 4, std::vector<double>{0.0, 1.0, 0.5 / 255.0, 2.0});
    const auto q = quantize(g);
    CHECK(q.params.lo == 0.0);
    CHECK(q.params.hi == 2.0);
    CHECK(q.bytes[0] == 0);
    CHECK(q.bytes[1] == 128);  // 127.5 rounds up
    CHECK(q.bytes[3] == 255);
    CHECK(gray_scale(q.params) == doctest::Approx(127.5));
}

TEST_CASE("constant mosaics quantize to zero and dequantize exactly") {
    RealGrid g(3, 3, 1.25);
    const auto q = quantize(g);
    for (auto b : q.bytes) CHECK(b == 0);
    CHECK(dequantize(q.bytes, q.params) == g);
    CHECK(gray_scale(q.params) == 1.0);
}

TEST_CASE("quantization round-trip error stays within half a level") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> span(0.01, 100.0), off(-50.0, 50.0);
        const double lo = off(rng), hi = lo + span(rng);
        const auto g = oracle::random_grid(16, 24, seed + 1000, lo, hi);
        const auto q = quantize(g);
        const auto back = dequantize(q.bytes, q.params);
        const double bound = (q.params.hi - q.params.lo) / 510.0 + 1e-9;
        double worst = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(g[i] - back[i]));
        CHECK(worst <= bound);
    }
}

TEST_CASE("LTNS encode/decode is bit exact") {
    auto t = counting_tensor(3, 5, 7);
    t.values()[4] = -0.0f;
    t.values()[5] = 1e-38f;
    const auto bytes = encode_tensor(t);
    CHECK(bytes.size() == kTensorHeaderBytes + t.size() * 4);
    CHECK(bytes[0] == 'L');
    const auto back = decode_tensor(bytes);
    REQUIRE(back.values().size() == t.values().size());
    CHECK(std::memcmp(back.values().data(), t.values().data(), t.size() * 4) == 0);

    const auto path = temp_path("roundtrip.ltns");
    write_tensor(path, t);
    CHECK(read_tensor(path) == t);
    std::filesystem::remove(path);
}

TEST_CASE("LTNS rejects malformed input") {
    const auto good = encode_tensor(counting_tensor(2, 2, 2));
    auto bad_magic = good;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(decode_tensor(bad_magic), FormatError);
    auto bad_version = good;
    bad_version[4] = 9;
    CHECK_THROWS_AS(decode_tensor(bad_version), FormatError);
    auto truncated = good;
    truncated.pop_back();
    CHECK_THROWS_AS(decode_tensor(truncated), FormatError);
    auto trailing = good;
    trailing.push_back(0);
    CHECK_THROWS_AS(decode_tensor(trailing), FormatError);
    auto zero_dim = good;
    zero_dim[6] = zero_dim[7] = zero_dim[8] = zero_dim[9] = 0;
    CHECK_THROWS_AS(decode_tensor(zero_dim), FormatError);
    CHECK_THROWS_AS(decode_tensor(std::span<const std::uint8_t>(good.data(), 5)), FormatError);
    CHECK_THROWS(read_tensor(temp_path("does_not_exist.ltns")));
}

TEST_CASE("PGM round trip keeps pixels and comments") {
    ByteGrid img(3, 5);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<std::uint8_t>(i * 17);
    const auto path = temp_path("img.pgm");
    write_pgm(path, img, {"hello world", "second"});
    const auto back = read_pgm(path);
    CHECK(back.image == img);
    REQUIRE(back.comments.size() == 2);
    CHECK(back.comments[0] == "hello world");

    std::ofstream(path, std::ios::binary) << "P2\n1 1\n255\n0\n";
    CHECK_THROWS_AS(read_pgm(path), FormatError);
    std::ofstream(path, std::ios::binary) << "P5\n4 4\n255\nab";
    CHECK_THROWS_AS(read_pgm(path), FormatError);
    std::filesystem::remove(path);
}

TEST_CASE("feature tensor validation") {
    FeatureTensor t(1, 1, 2);
    t.values()[1] = std::nanf("");
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    CHECK_THROWS_AS(tile(t), std::invalid_argument);
}
