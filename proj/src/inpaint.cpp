#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lpc/inpaint.hpp"

namespace lpc {

void MaskedImage::validate() const {
    if (!grid.same_shape(mask))
        throw std::invalid_argument("MaskedImage: grid and mask shapes differ");
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (!mask[i] && !std::isfinite(grid[i]))
            throw std::invalid_argument("MaskedImage: non-finite known value");
}

std::size_t MaskedImage::unknown_count() const {
    return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(),
                                                  [](std::uint8_t m) { return m != 0; }));
}

void TeleaParams::validate() const {
    if (radius < 1) throw std::invalid_argument("TeleaParams: radius must be >= 1");
}

void NSParams::validate() const {
    if (iterations < 1 || !(step_size > 0.0) || diffusion_every < 1 || diffusion_steps < 1)
        throw std::invalid_argument("NSParams: all parameters must be positive");
}

namespace {

void require_known(const MaskedImage& image, const char* engine) {
    image.validate();
    if (image.unknown_count() == image.grid.size())
        throw std::invalid_argument(std::string(engine) + ": image has no known pixels");
}

struct Range {
    double lo, hi;
};

Range known_range(const MaskedImage& image) {
    Range r{kFarAway, -kFarAway};
    for (std::size_t i = 0; i < image.grid.size(); ++i)
        if (!image.mask[i]) {
            r.lo = std::min(r.lo, image.grid[i]);
            r.hi = std::max(r.hi, image.grid[i]);
        }
    return r;
}

}  // namespace

RealGrid fill_zero(const MaskedImage& image) {
    image.validate();
    RealGrid out = image.grid;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (image.mask[i]) out[i] = 0.0;
    return out;
}

RealGrid inpaint_rows_nearest(const MaskedImage& image) {
    require_known(image, "inpaint_rows_nearest");
    const std::size_t H = image.grid.rows(), W = image.grid.cols();
    RealGrid out = image.grid;
    std::vector<std::uint8_t> column_has_known(W, 0);
    std::vector<long> up(H), down(H);

    for (std::size_t c = 0; c < W; ++c) {
        long last = -1;
        for (std::size_t r = 0; r < H; ++r) {
            if (!image.mask(r, c)) last = static_cast<long>(r);
            up[r] = last;
        }
        if (last < 0) continue;
        column_has_known[c] = 1;
        last = -1;
        for (std::size_t r = H; r-- > 0;) {
            if (!image.mask(r, c)) last = static_cast<long>(r);
            down[r] = last;
        }
        for (std::size_t r = 0; r < H; ++r) {
            if (!image.mask(r, c)) continue;
            const long ir = static_cast<long>(r);
            long src;
            if (up[r] < 0)
                src = down[r];
            else if (down[r] < 0)
                src = up[r];
            else
                src = (ir - up[r] <= down[r] - ir) ? up[r] : down[r];
            out(r, c) = image.grid(static_cast<std::size_t>(src), c);
        }
    }

    // Columns without any known pixel borrow from the nearest filled column, ties left.
    std::vector<long> left(W), right(W);
    long last = -1;
    for (std::size_t c = 0; c < W; ++c) {
        if (column_has_known[c]) last = static_cast<long>(c);
        left[c] = last;
    }
    last = -1;
    for (std::size_t c = W; c-- > 0;) {
        if (column_has_known[c]) last = static_cast<long>(c);
        right[c] = last;
    }
    for (std::size_t c = 0; c < W; ++c) {
        if (column_has_known[c]) continue;
        const long ic = static_cast<long>(c);
        long src;
        if (left[c] < 0)
            src = right[c];
        else if (right[c] < 0)
            src = left[c];
        else
            src = (ic - left[c] <= right[c] - ic) ? left[c] : right[c];
        for (std::size_t r = 0; r < H; ++r) out(r, c) = out(r, static_cast<std::size_t>(src));
    }
    return out;
}

RealGrid inpaint_telea(const MaskedImage& image, const TeleaParams& params) {
    params.validate();
    require_known(image, "inpaint_telea");
    const std::size_t H = image.grid.rows(), W = image.grid.cols();
    const auto [T, order] = fmm_distance(image.mask);

    RealGrid out = image.grid;
    std::vector<std::uint8_t> known(H * W);
    for (std::size_t i = 0; i < H * W; ++i) known[i] = image.mask[i] ? 0 : 1;

    // Unit normal of the marching front; one-sided where a neighbor is missing.
    auto normal = [&](std::size_t r, std::size_t c) {
        auto diff = [&](bool has_prev, double prev, bool has_next, double next, double here) {
            has_prev = has_prev && std::isfinite(prev);
            has_next = has_next && std::isfinite(next);
            if (has_prev && has_next) return 0.5 * (next - prev);
            if (has_next) return next - here;
            if (has_prev) return here - prev;
            return 0.0;
        };
        const double here = T(r, c);
        const double gx = diff(c > 0, c > 0 ? T(r, c - 1) : 0.0, c + 1 < W,
                               c + 1 < W ? T(r, c + 1) : 0.0, here);
        const double gy = diff(r > 0, r > 0 ? T(r - 1, c) : 0.0, r + 1 < H,
                               r + 1 < H ? T(r + 1, c) : 0.0, here);
        const double n = std::hypot(gx, gy);
        return n > 0.0 ? std::pair{gy / n, gx / n} : std::pair{0.0, 0.0};
    };

    const long R = params.radius;
    for (const std::size_t p : order) {
        const std::size_t pr = p / W, pc = p % W;
        const auto [ny, nx] = normal(pr, pc);
        // Accumulate offsets from one contributing value so equal inputs give that value
        // back exactly, then clamp away rounding outside the contributors' range.
        double weighted = 0.0, total = 0.0, ref = 0.0, lo = kFarAway, hi = -kFarAway;
        bool have_ref = false;
        for (long dy = -R; dy <= R; ++dy) {
            const long qr = static_cast<long>(pr) + dy;
            if (qr < 0 || qr >= static_cast<long>(H)) continue;
            for (long dx = -R; dx <= R; ++dx) {
                const long d2 = dy * dy + dx * dx;
                if (d2 == 0 || d2 > R * R) continue;
                const long qc = static_cast<long>(pc) + dx;
                if (qc < 0 || qc >= static_cast<long>(W)) continue;
                const std::size_t q = static_cast<std::size_t>(qr) * W + static_cast<std::size_t>(qc);
                if (!known[q]) continue;
                // (dy, dx) points from the target to q; p - q is its negation.
                const double dist = std::sqrt(static_cast<double>(d2));
                const double dir = std::max(-(dy * ny + dx * nx) / dist, 0.01);
                const double dst = 1.0 / static_cast<double>(d2);
                const double lev = 1.0 / (1.0 + std::abs(T[p] - T[q]));
                const double w = dir * dst * lev;
                if (!have_ref) ref = out[q], have_ref = true;
                weighted += w * (out[q] - ref);
                total += w;
                lo = std::min(lo, out[q]);
                hi = std::max(hi, out[q]);
            }
        }
        // FMM guarantees a frozen 4-neighbor, so total > 0.
        out[p] = std::clamp(ref + weighted / total, lo, hi);
        known[p] = 1;
    }
    return out;
}

namespace {

constexpr double kDiffusionRate = 0.2;

/// Derivative helpers with central differences inside and one-sided differences at the
/// border. `u` is row-major H x W.
struct Stencil {
    std::size_t H, W;

    double dx(const std::vector<double>& u, std::size_t r, std::size_t c) const {
        const std::size_t i = r * W + c;
        if (c > 0 && c + 1 < W) return 0.5 * (u[i + 1] - u[i - 1]);
        if (c + 1 < W) return u[i + 1] - u[i];
        if (c > 0) return u[i] - u[i - 1];
        return 0.0;
    }
    double dy(const std::vector<double>& u, std::size_t r, std::size_t c) const {
        const std::size_t i = r * W + c;
        if (r > 0 && r + 1 < H) return 0.5 * (u[i + W] - u[i - W]);
        if (r + 1 < H) return u[i + W] - u[i];
        if (r > 0) return u[i] - u[i - W];
        return 0.0;
    }
    /// Level-line curvature times gradient magnitude, the anisotropic diffusion term
    /// (I_xx I_y^2 - 2 I_x I_y I_xy + I_yy I_x^2) / |grad I|^2. Zero across straight
    /// level lines, so edges and stripes are not blurred. Borders mirror.
    double curvature_flow(const std::vector<double>& u, std::size_t r, std::size_t c) const {
        const std::size_t rm = r > 0 ? r - 1 : r, rp = r + 1 < H ? r + 1 : r;
        const std::size_t cm = c > 0 ? c - 1 : c, cp = c + 1 < W ? c + 1 : c;
        auto at = [&](std::size_t rr, std::size_t cc) { return u[rr * W + cc]; };
        const double here = at(r, c);
        const double ix = 0.5 * (at(r, cp) - at(r, cm)), iy = 0.5 * (at(rp, c) - at(rm, c));
        const double ixx = at(r, cp) - 2 * here + at(r, cm);
        const double iyy = at(rp, c) - 2 * here + at(rm, c);
        const double ixy = 0.25 * (at(rp, cp) - at(rp, cm) - at(rm, cp) + at(rm, cm));
        const double g2 = ix * ix + iy * iy;
        if (g2 < 1e-12) return 0.0;
        return (ixx * iy * iy - 2 * ix * iy * ixy + iyy * ix * ix) / g2;
    }
    /// 5-point Laplacian; a neighbor outside the grid contributes nothing (Neumann).
    double laplacian(const std::vector<double>& u, std::size_t r, std::size_t c) const {
        const std::size_t i = r * W + c;
        double s = 0.0;
        if (c > 0) s += u[i - 1] - u[i];
        if (c + 1 < W) s += u[i + 1] - u[i];
        if (r > 0) s += u[i - W] - u[i];
        if (r + 1 < H) s += u[i + W] - u[i];
        return s;
    }
};

}  // namespace

RealGrid inpaint_ns(const MaskedImage& image, const NSParams& params) {
    params.validate();
    require_known(image, "inpaint_ns");
    const std::size_t H = image.grid.rows(), W = image.grid.cols();
    const Range range = known_range(image);

    RealGrid init = inpaint_rows_nearest(image);
    if (!(range.hi > range.lo)) return init;  // every known value equal: already exact

    // Work in [0, 1] so the step size does not depend on the data scale.
    const double span = range.hi - range.lo;
    std::vector<double> u(H * W);
    for (std::size_t i = 0; i < H * W; ++i) u[i] = (init[i] - range.lo) / span;

    std::vector<std::size_t> unknown;
    std::vector<std::uint8_t> in_halo(H * W, 0);
    for (std::size_t i = 0; i < H * W; ++i) {
        if (!image.mask[i]) continue;
        unknown.push_back(i);
        const std::size_t r = i / W, c = i % W;
        in_halo[i] = 1;
        if (r > 0) in_halo[i - W] = 1;
        if (r + 1 < H) in_halo[i + W] = 1;
        if (c > 0) in_halo[i - 1] = 1;
        if (c + 1 < W) in_halo[i + 1] = 1;
    }
    std::vector<std::size_t> halo;
    for (std::size_t i = 0; i < H * W; ++i)
        if (in_halo[i]) halo.push_back(i);

    const Stencil st{H, W};
    std::vector<double> lap(H * W, 0.0), update(unknown.size());

    for (int it = 1; it <= params.iterations; ++it) {
        for (std::size_t i : halo) lap[i] = st.laplacian(u, i / W, i % W);

        for (std::size_t k = 0; k < unknown.size(); ++k) {
            const std::size_t i = unknown[k], r = i / W, c = i % W;
            const double ix = st.dx(u, r, c), iy = st.dy(u, r, c);
            const double norm = std::sqrt(ix * ix + iy * iy + 1e-12);
            // Isophote direction (-I_y, I_x), normalized.
            const double beta = (st.dx(lap, r, c) * -iy + st.dy(lap, r, c) * ix) / norm;

            // Slope-limited gradient magnitude.
            const double xb = c > 0 ? u[i] - u[i - 1] : 0.0;
            const double xf = c + 1 < W ? u[i + 1] - u[i] : 0.0;
            const double yb = r > 0 ? u[i] - u[i - W] : 0.0;
            const double yf = r + 1 < H ? u[i + W] - u[i] : 0.0;
            double g2;
            if (beta > 0.0)
                g2 = std::pow(std::min(xb, 0.0), 2) + std::pow(std::max(xf, 0.0), 2) +
                     std::pow(std::min(yb, 0.0), 2) + std::pow(std::max(yf, 0.0), 2);
            else
                g2 = std::pow(std::max(xb, 0.0), 2) + std::pow(std::min(xf, 0.0), 2) +
                     std::pow(std::max(yb, 0.0), 2) + std::pow(std::min(yf, 0.0), 2);
            update[k] = params.step_size * beta * std::sqrt(g2);
        }
        for (std::size_t k = 0; k < unknown.size(); ++k)
            u[unknown[k]] = std::clamp(u[unknown[k]] + update[k], 0.0, 1.0);

        if (it % params.diffusion_every == 0) {
            for (int s = 0; s < params.diffusion_steps; ++s) {
                for (std::size_t k = 0; k < unknown.size(); ++k) {
                    const std::size_t i = unknown[k];
                    update[k] = kDiffusionRate * st.curvature_flow(u, i / W, i % W);
                }
                for (std::size_t k = 0; k < unknown.size(); ++k)
                    u[unknown[k]] = std::clamp(u[unknown[k]] + update[k], 0.0, 1.0);
            }
        }
    }

    RealGrid out = image.grid;
    for (std::size_t i : unknown) out[i] = std::clamp(range.lo + u[i] * span, range.lo, range.hi);
    return out;
}

}  // namespace lpc
