#include <cmath>
#include <functional>
#include <queue>
#include <utility>

#include "lpc/inpaint.hpp"

namespace lpc {

namespace {

/// Upwind solve of |grad T| = 1 at (r, c) from frozen 4-neighbors.
double upwind_update(const RealGrid& T, const std::vector<std::uint8_t>& frozen, std::size_t r,
                     std::size_t c) {
    const std::size_t H = T.rows(), W = T.cols();
    auto frozen_value = [&](std::size_t rr, std::size_t cc) {
        const std::size_t i = rr * W + cc;
        return frozen[i] ? T[i] : kFarAway;
    };
    double a = kFarAway, b = kFarAway;
    if (c > 0) a = std::min(a, frozen_value(r, c - 1));
    if (c + 1 < W) a = std::min(a, frozen_value(r, c + 1));
    if (r > 0) b = std::min(b, frozen_value(r - 1, c));
    if (r + 1 < H) b = std::min(b, frozen_value(r + 1, c));

    if (std::isinf(a) && std::isinf(b)) return kFarAway;
    if (std::isinf(a) || std::isinf(b) || std::abs(a - b) >= 1.0) return std::min(a, b) + 1.0;
    const double diff = a - b;
    return 0.5 * (a + b + std::sqrt(2.0 - diff * diff));
}

}  // namespace

FmmResult fmm_distance(const MaskGrid& mask) {
    const std::size_t H = mask.rows(), W = mask.cols();
    FmmResult out{RealGrid(H, W, kFarAway), {}};
    RealGrid& T = out.distance;
    std::vector<std::uint8_t> frozen(H * W, 0);

    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> band;

    for (std::size_t i = 0; i < H * W; ++i)
        if (!mask[i]) {
            T[i] = 0.0;
            frozen[i] = 1;
        }

    auto relax_neighbors = [&](std::size_t r, std::size_t c) {
        auto relax = [&](std::size_t rr, std::size_t cc) {
            const std::size_t j = rr * W + cc;
            if (frozen[j]) return;
            const double t = upwind_update(T, frozen, rr, cc);
            if (t < T[j]) {
                T[j] = t;
                band.emplace(t, j);
            }
        };
        if (r > 0) relax(r - 1, c);
        if (r + 1 < H) relax(r + 1, c);
        if (c > 0) relax(r, c - 1);
        if (c + 1 < W) relax(r, c + 1);
    };

    // Seed from known pixels that touch the unknown region.
    for (std::size_t r = 0; r < H; ++r)
        for (std::size_t c = 0; c < W; ++c)
            if (!mask(r, c)) relax_neighbors(r, c);

    while (!band.empty()) {
        const auto [t, i] = band.top();
        band.pop();
        if (frozen[i] || t != T[i]) continue;  // stale entry
        frozen[i] = 1;
        out.order.push_back(i);
        relax_neighbors(i / W, i % W);
    }
    return out;
}

}  // namespace lpc
