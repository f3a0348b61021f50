#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "lpc/grid.hpp"

namespace lpc::flow {

/// Time-indexed frames I(x, y, t), t = 0, 1, ...
struct FrameSequence {
    std::vector<RealGrid> frames;

    std::size_t rows() const { return frames.empty() ? 0 : frames.front().rows(); }
    std::size_t cols() const { return frames.empty() ? 0 : frames.front().cols(); }
    /// Throws std::invalid_argument: fewer than 2 frames, ragged sizes or non-finite values.
    void validate() const;
};

/// Flow in pixels per frame step. Constant unless the maps are set.
struct FlowField {
    double vx = 0.0;
    double vy = 0.0;
    RealGrid vx_map;
    RealGrid vy_map;

    static FlowField constant(double vx, double vy) { return {vx, vy, {}, {}}; }
    bool varying() const { return !vx_map.empty(); }
    double x(std::size_t r, std::size_t c) const { return varying() ? vx_map(r, c) : vx; }
    double y(std::size_t r, std::size_t c) const { return varying() ? vy_map(r, c) : vy; }
};

struct Conv {
    RealGrid kernel;
    std::string label = "conv";
};
enum class Activation { relu, sigmoid, tanh };
struct Pointwise {
    Activation activation;
};
struct LocalMax {
    int half_window = 1;
};
struct Downscale {
    int sx = 2;
    int sy = 2;
};
using Transform = std::variant<Conv, Pointwise, LocalMax, Downscale>;

std::string name(const Transform& t);
Conv box_kernel(int size);
Conv random_kernel(int size, std::uint64_t seed);

enum class ProfileKind { gaussian_bump, stripes, smoothed_noise };
struct Profile {
    ProfileKind kind = ProfileKind::gaussian_bump;
    std::uint64_t seed = 0;  // smoothed_noise only
};
std::string name(const Profile& p);

/// Frame 0 of the given profile: a Gaussian bump offset so its tails sit on a negative
/// plateau, diagonal sinusoidal stripes, or periodically blurred white noise.
RealGrid make_profile(const Profile& profile, std::size_t rows, std::size_t cols);

/// Frame t is frame 0 circularly shifted by t * (vx, vy).
/// Throws std::invalid_argument for non-integer flow components.
FrameSequence synth_translating(const Profile& profile, double vx, double vy,
                                std::size_t n_frames, std::size_t rows, std::size_t cols);

/// out(r, c) = in(r - dy, c - dx) with wraparound.
RealGrid circular_shift(const RealGrid& in, long dy, long dx);

/// Differential residual I_x v_x + I_y v_y + I_t per consecutive frame pair: periodic
/// central differences on the mean of the two frames, forward difference in time.
std::vector<RealGrid> flow_residual(const FrameSequence& seq, const FlowField& flow);

/// Residual of the transport equation integrated along its characteristics over one
/// step: I(x, t + 1) - I(x - v, t), periodic. Zero exactly for exact integer
/// translations. Requires a constant integer flow.
std::vector<RealGrid> characteristic_residual(const FrameSequence& seq, const FlowField& flow);

/// Throws std::invalid_argument when a kernel exceeds the frame or a downscale factor
/// does not divide the frame size.
FrameSequence apply_transform(const FrameSequence& seq, const Transform& transform);
RealGrid apply_transform(const RealGrid& frame, const Transform& transform);

/// Flow expected after the transform: unchanged, or divided by the scale factors.
FlowField predicted_flow(const Transform& transform, const FlowField& flow);

/// Mean periodic central-difference gradient magnitude over all frames.
double gradient_scale(const FrameSequence& seq);

struct ResidualStats {
    double max = 0.0;
    double rms = 0.0;
};
ResidualStats stats(const std::vector<RealGrid>& residuals, double scale);

struct InvarianceRow {
    std::string transform;
    /// Characteristic residual with the predicted flow, normalized.
    ResidualStats residual;
    /// Same, with the flow left unscaled; only meaningful for Downscale.
    ResidualStats unscaled;
    /// Differential residual with the predicted flow, normalized. Recorded, not gated:
    /// it carries the finite-difference truncation error of the signal itself.
    ResidualStats differential;
    bool pass = false;
};

/// Applies each transform to `seq` (an exact translation with constant integer `flow`),
/// and checks the predicted flow against the result. A row passes when the normalized
/// max residual is below `tolerance`; Downscale rows must additionally show the
/// unscaled flow residual at least 100x larger.
std::vector<InvarianceRow> invariance_report(const FrameSequence& seq, const FlowField& flow,
                                             const std::vector<Transform>& transforms,
                                             double tolerance);

}  // namespace lpc::flow
