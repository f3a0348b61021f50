#include <cmath>

#include "doctest.h"
#include "lpc/flow.hpp"

using namespace lpc;
using namespace lpc::flow;

namespace {

double max_abs(const std::vector<RealGrid>& grids) {
    double m = 0.0;
    for (const auto& g : grids)
        for (double v : g) m = std::max(m, std::abs(v));
    return m;
}

const std::vector<Profile> kProfiles{{ProfileKind::gaussian_bump, 0},
                                     {ProfileKind::stripes, 0},
                                     {ProfileKind::smoothed_noise, 4}};

}  // namespace

TEST_CASE("zero flow gives identical frames") {
    const auto seq = synth_translating({ProfileKind::smoothed_noise, 1}, 0, 0, 4, 32, 32);
    for (const auto& f : seq.frames) CHECK(f == seq.frames[0]);
}

TEST_CASE("frame t is frame 0 shifted by t times the flow") {
    for (const auto& p : kProfiles)
        for (auto [vx, vy] : {std::pair{1, 0}, {0, 1}, {1, 1}, {2, 0}, {-1, 3}}) {
            const auto seq = synth_translating(p, vx, vy, 4, 32, 40);
            for (long t = 0; t < 4; ++t)
                CHECK(seq.frames[std::size_t(t)] == circular_shift(seq.frames[0], t * vy, t * vx));
        }
}

TEST_CASE("the bump center advances one column per frame") {
    const auto seq = synth_translating({ProfileKind::gaussian_bump, 0}, 1, 0, 3, 32, 32);
    for (std::size_t t = 0; t < 3; ++t) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < seq.frames[t].size(); ++i)
            if (seq.frames[t][i] > seq.frames[t][best]) best = i;
        CHECK(best % 32 == 16 + t);
        CHECK(best / 32 == 16);
    }
}

TEST_CASE("non-integer flow and short sequences are rejected") {
    CHECK_THROWS_AS(synth_translating({}, 0.5, 0, 3, 16, 16), std::invalid_argument);
    FrameSequence one{{RealGrid(4, 4)}};
    CHECK_THROWS_AS(flow_residual(one, FlowField::constant(1, 0)), std::invalid_argument);
}

TEST_CASE("differential residual vanishes on constant and planar sequences") {
    FrameSequence constant{{RealGrid(8, 8, 2.0), RealGrid(8, 8, 2.0), RealGrid(8, 8, 2.0)}};
    CHECK(max_abs(flow_residual(constant, FlowField::constant(3, -2))) == 0.0);

    // I(x, y, t) = x - t away from the periodic seam.
    FrameSequence plane;
    for (int t = 0; t < 3; ++t) {
        RealGrid f(6, 16);
        for (std::size_t r = 0; r < 6; ++r)
            for (std::size_t c = 0; c < 16; ++c) f(r, c) = double(c) - t;
        plane.frames.push_back(f);
    }
    const auto res = flow_residual(plane, FlowField::constant(1, 0));
    for (const auto& g : res)
        for (std::size_t r = 0; r < 6; ++r)
            for (std::size_t c = 1; c + 1 < 16; ++c) CHECK(g(r, c) == doctest::Approx(0.0));
}

TEST_CASE("the wrong flow leaves a residual of one extra x-derivative") {
    const auto seq = synth_translating({ProfileKind::stripes, 0}, 1, 0, 3, 32, 32);
    const auto right = flow_residual(seq, FlowField::constant(1, 0));
    const auto wrong = flow_residual(seq, FlowField::constant(2, 0));
    CHECK(max_abs(wrong) > 0.1);
    // The extra term is exactly the central x-difference of the averaged frames.
    for (std::size_t k = 0; k < wrong.size(); ++k) {
        RealGrid mid(32, 32);
        for (std::size_t i = 0; i < mid.size(); ++i)
            mid[i] = 0.5 * (seq.frames[k][i] + seq.frames[k + 1][i]);
        for (std::size_t r = 0; r < 32; ++r)
            for (std::size_t c = 0; c < 32; ++c) {
                const double ix = 0.5 * (mid(r, (c + 1) % 32) - mid(r, (c + 31) % 32));
                CHECK(wrong[k](r, c) - right[k](r, c) == doctest::Approx(ix).epsilon(1e-9));
            }
    }
    CHECK(max_abs(characteristic_residual(seq, FlowField::constant(1, 0))) == 0.0);
    CHECK(max_abs(characteristic_residual(seq, FlowField::constant(2, 0))) > 0.1);
}

TEST_CASE("transform identities") {
    const auto seq = synth_translating({ProfileKind::gaussian_bump, 0}, 1, 1, 3, 16, 16);
    FrameSequence positive = seq;
    for (auto& f : positive.frames)
        for (double& v : f) v += 5.0;
    CHECK(apply_transform(positive, Pointwise{Activation::relu}).frames == positive.frames);
    CHECK(apply_transform(seq, Conv{RealGrid(1, 1, 1.0), "identity"}).frames == seq.frames);

    RealGrid onehot(7, 7, 0.0);
    onehot(3, 3) = 1.0;
    const auto pooled = apply_transform(onehot, LocalMax{1});
    for (std::size_t r = 0; r < 7; ++r)
        for (std::size_t c = 0; c < 7; ++c)
            CHECK(pooled(r, c) == ((r >= 2 && r <= 4 && c >= 2 && c <= 4) ? 1.0 : 0.0));

    RealGrid ramp(4, 6);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = double(i);
    const auto half = apply_transform(ramp, Downscale{2, 2});
    REQUIRE(half.rows() == 2);
    REQUIRE(half.cols() == 3);
    CHECK(half(1, 2) == ramp(2, 4));

    CHECK_THROWS_AS(apply_transform(RealGrid(3, 3), box_kernel(5)), std::invalid_argument);
    CHECK_THROWS_AS(apply_transform(RealGrid(5, 5), Downscale{2, 2}), std::invalid_argument);
}

TEST_CASE("convolution wraps around the borders") {
    RealGrid img(5, 5, 0.0);
    img(0, 0) = 1.0;
    const auto out = apply_transform(img, box_kernel(3));
    double total = 0.0;
    for (double v : out) total += v;
    CHECK(total == doctest::Approx(1.0));
    CHECK(out(4, 4) == doctest::Approx(1.0 / 9.0));  // wraps around the corner
}

TEST_CASE("predicted flow") {
    const auto v = FlowField::constant(2, 0);
    const auto d = predicted_flow(Downscale{2, 2}, v);
    CHECK(d.vx == 1.0);
    CHECK(d.vy == 0.0);
    const auto c = predicted_flow(random_kernel(3, 1), FlowField::constant(1, 1));
    CHECK(c.vx == 1.0);
    CHECK(c.vy == 1.0);
    const auto p = predicted_flow(Pointwise{Activation::tanh}, FlowField::constant(0, 3));
    CHECK(p.vx == 0.0);
    CHECK(p.vy == 3.0);
    CHECK(predicted_flow(LocalMax{2}, FlowField::constant(1, 2)).vy == 2.0);
}

TEST_CASE("box convolution of a translating bump keeps the flow exactly") {
    const auto seq = synth_translating({ProfileKind::gaussian_bump, 0}, 1, 1, 4, 64, 64);
    const auto rows = invariance_report(seq, FlowField::constant(1, 1), {box_kernel(3)}, 1e-6);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].residual.max < 1e-6);
    CHECK(rows[0].pass);
}

TEST_CASE("downscale needs the halved flow") {
    const auto seq = synth_translating({ProfileKind::gaussian_bump, 0}, 2, 0, 4, 64, 64);
    const auto rows = invariance_report(seq, FlowField::constant(2, 0), {Downscale{2, 2}}, 1e-6);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].residual.max < 1e-6);
    CHECK(rows[0].unscaled.max > 100 * rows[0].residual.max);
    CHECK(rows[0].unscaled.max > 1e-3);
    CHECK(rows[0].pass);
}

TEST_CASE("every network operation preserves the flow of every test signal") {
    const std::vector<Transform> ops{box_kernel(3), random_kernel(3, 7), Pointwise{Activation::relu},
                                     Pointwise{Activation::sigmoid}, Pointwise{Activation::tanh},
                                     LocalMax{1}};
    for (const auto& p : kProfiles)
        for (auto [vx, vy] : {std::pair{1, 0}, {0, 1}, {1, 1}, {2, 0}}) {
            const auto seq = synth_translating(p, vx, vy, 3, 32, 32);
            for (const auto& row : invariance_report(seq, FlowField::constant(vx, vy), ops, 1e-6)) {
                INFO(name(p), " ", row.transform);
                CHECK(row.pass);
                CHECK(std::isfinite(row.differential.max));
            }
        }
}

TEST_CASE("a zero tolerance fails every row") {
    const auto seq = synth_translating({ProfileKind::stripes, 0}, 1, 0, 3, 16, 16);
    for (const auto& row : invariance_report(seq, FlowField::constant(1, 0), {box_kernel(3)}, 0.0))
        CHECK_FALSE(row.pass);
}

TEST_CASE("residual statistics are normalized by the gradient scale") {
    RealGrid r(2, 2, 0.0);
    r(0, 0) = 4.0;
    const auto s = stats({r}, 2.0);
    CHECK(s.max == doctest::Approx(2.0));
    CHECK(s.rms == doctest::Approx(1.0));
}
