#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "lpc/grid.hpp"

namespace lpc {

/// Grid plus unknown-pixel mask (1 = unknown). Values under the mask are ignored.
struct MaskedImage {
    RealGrid grid;
    MaskGrid mask;

    /// Throws std::invalid_argument on a shape mismatch or a non-finite known value.
    void validate() const;
    std::size_t unknown_count() const;
};

struct TeleaParams {
    int radius = 3;
    void validate() const;
};

struct NSParams {
    int iterations = 300;
    double step_size = 0.1;
    int diffusion_every = 15;
    int diffusion_steps = 2;
    void validate() const;
};

inline constexpr double kFarAway = std::numeric_limits<double>::infinity();

struct FmmResult {
    /// Arrival time; 0 on known pixels, grows into the unknown region.
    RealGrid distance;
    /// Unknown pixels as linear indices, nondecreasing distance.
    std::vector<std::size_t> order;
};

/// Fast marching solve of |grad T| = 1 outward from the known region.
/// Unknown pixels unreachable from any known pixel keep T = infinity and are
/// left out of the order.
FmmResult fmm_distance(const MaskGrid& mask);

/// Fast-marching weighted-average inpainting. Each unknown pixel is a convex
/// combination of already-known pixels within `radius`.
/// Throws std::invalid_argument when no pixel is known.
RealGrid inpaint_telea(const MaskedImage& image, const TeleaParams& params = {});

/// Isophote-transport inpainting: the Laplacian is advected along the level
/// lines, with periodic anisotropic (curvature) diffusion passes. Starts from
/// inpaint_rows_nearest.
/// Throws std::invalid_argument when no pixel is known.
RealGrid inpaint_ns(const MaskedImage& image, const NSParams& params = {});

/// Each unknown pixel copies the nearest known pixel in its column, ties going up.
/// Columns with no known pixel fall back to the nearest known pixel in the row.
/// Throws std::invalid_argument when no pixel is known.
RealGrid inpaint_rows_nearest(const MaskedImage& image);

/// Unknown pixels set to zero: the no-recovery baseline.
RealGrid fill_zero(const MaskedImage& image);

}  // namespace lpc
