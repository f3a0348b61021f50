#include "lpc/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace lpc::flow {

namespace {

std::size_t wrap(long i, std::size_t n) {
    const long m = static_cast<long>(n);
    return static_cast<std::size_t>(((i % m) + m) % m);
}

bool is_integer(double v) { return std::isfinite(v) && v == std::round(v); }

}  // namespace

void FrameSequence::validate() const {
    if (frames.size() < 2) throw std::invalid_argument("FrameSequence: need at least 2 frames");
    for (const auto& f : frames) {
        if (!f.same_shape(frames.front()) || f.empty())
            throw std::invalid_argument("FrameSequence: frames differ in size");
        for (double v : f)
            if (!std::isfinite(v)) throw std::invalid_argument("FrameSequence: non-finite value");
    }
}

std::string name(const Transform& t) {
    struct Visitor {
        std::string operator()(const Conv& c) const { return c.label; }
        std::string operator()(const Pointwise& p) const {
            switch (p.activation) {
            case Activation::relu: return "relu";
            case Activation::sigmoid: return "sigmoid";
            case Activation::tanh: return "tanh";
            }
            return "pointwise";
        }
        std::string operator()(const LocalMax& m) const {
            return "localmax_h" + std::to_string(m.half_window);
        }
        std::string operator()(const Downscale& d) const {
            return d.sx == d.sy ? "downscale" + std::to_string(d.sx)
                                : "downscale" + std::to_string(d.sx) + "x" + std::to_string(d.sy);
        }
    };
    return std::visit(Visitor{}, t);
}

Conv box_kernel(int size) {
    const auto n = static_cast<std::size_t>(size);
    return {RealGrid(n, n, 1.0 / static_cast<double>(n * n)),
            "conv" + std::to_string(size) + "x" + std::to_string(size) + "_box"};
}

Conv random_kernel(int size, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(size);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RealGrid k(n, n);
    for (double& v : k) v = u(rng);
    return {std::move(k), "conv" + std::to_string(size) + "x" + std::to_string(size) + "_random"};
}

std::string name(const Profile& p) {
    switch (p.kind) {
    case ProfileKind::gaussian_bump: return "gaussian_bump";
    case ProfileKind::stripes: return "stripes";
    case ProfileKind::smoothed_noise: return "smoothed_noise_s" + std::to_string(p.seed);
    }
    return "unknown";
}

RealGrid make_profile(const Profile& profile, std::size_t rows, std::size_t cols) {
    RealGrid g(rows, cols);
    const double H = static_cast<double>(rows), W = static_cast<double>(cols);
    switch (profile.kind) {
    case ProfileKind::gaussian_bump: {
        const double sigma = std::min(H, W) / 10.0;
        const double cy = H / 2.0, cx = W / 2.0;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
                const double dy = static_cast<double>(r) - cy, dx = static_cast<double>(c) - cx;
                g(r, c) = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma)) - 0.2;
            }
        break;
    }
    case ProfileKind::stripes: {
        // 4 periods across the width, 2 down the height: the phase changes under every
        // small integer shift, before and after halving.
        const double kx = 4.0 / W, ky = 2.0 / H;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                g(r, c) = std::sin(2 * std::numbers::pi *
                                   (kx * static_cast<double>(c) + ky * static_cast<double>(r)));
        break;
    }
    case ProfileKind::smoothed_noise: {
        std::mt19937_64 rng(profile.seed);
        std::normal_distribution<double> n01(0.0, 1.0);
        RealGrid noise(rows, cols);
        for (double& v : noise) v = n01(rng);
        // Periodic separable Gaussian blur, sigma 2.
        const int radius = 6;
        std::vector<double> w(2 * radius + 1);
        double wsum = 0.0;
        for (int i = -radius; i <= radius; ++i) wsum += w[static_cast<std::size_t>(i + radius)] = std::exp(-i * i / 8.0);
        for (double& v : w) v /= wsum;
        RealGrid tmp(rows, cols, 0.0);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                for (int i = -radius; i <= radius; ++i)
                    tmp(r, c) += w[static_cast<std::size_t>(i + radius)] *
                                 noise(r, wrap(static_cast<long>(c) + i, cols));
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
                double s = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    s += w[static_cast<std::size_t>(i + radius)] *
                         tmp(wrap(static_cast<long>(r) + i, rows), c);
                g(r, c) = s;
            }
        break;
    }
    }
    return g;
}

RealGrid circular_shift(const RealGrid& in, long dy, long dx) {
    RealGrid out(in.rows(), in.cols());
    for (std::size_t r = 0; r < in.rows(); ++r)
        for (std::size_t c = 0; c < in.cols(); ++c)
            out(r, c) = in(wrap(static_cast<long>(r) - dy, in.rows()),
                           wrap(static_cast<long>(c) - dx, in.cols()));
    return out;
}

FrameSequence synth_translating(const Profile& profile, double vx, double vy,
                                std::size_t n_frames, std::size_t rows, std::size_t cols) {
    if (!is_integer(vx) || !is_integer(vy))
        throw std::invalid_argument("synth_translating: flow must have integer components");
    if (rows == 0 || cols == 0) throw std::invalid_argument("synth_translating: empty frame");
    FrameSequence seq;
    const RealGrid first = make_profile(profile, rows, cols);
    for (std::size_t t = 0; t < n_frames; ++t) {
        const long st = static_cast<long>(t);
        seq.frames.push_back(circular_shift(first, st * static_cast<long>(vy), st * static_cast<long>(vx)));
    }
    return seq;
}

std::vector<RealGrid> flow_residual(const FrameSequence& seq, const FlowField& flow) {
    seq.validate();
    const std::size_t H = seq.rows(), W = seq.cols();
    if (flow.varying() && (!flow.vx_map.same_shape(H, W) || !flow.vy_map.same_shape(H, W)))
        throw std::invalid_argument("flow_residual: flow map size differs from frames");
    std::vector<RealGrid> out;
    for (std::size_t t = 0; t + 1 < seq.frames.size(); ++t) {
        const RealGrid& a = seq.frames[t];
        const RealGrid& b = seq.frames[t + 1];
        auto mean = [&](std::size_t r, std::size_t c) { return 0.5 * (a(r, c) + b(r, c)); };
        RealGrid res(H, W);
        for (std::size_t r = 0; r < H; ++r)
            for (std::size_t c = 0; c < W; ++c) {
                const std::size_t cp = wrap(static_cast<long>(c) + 1, W), cm = wrap(static_cast<long>(c) - 1, W);
                const std::size_t rp = wrap(static_cast<long>(r) + 1, H), rm = wrap(static_cast<long>(r) - 1, H);
                const double ix = 0.5 * (mean(r, cp) - mean(r, cm));
                const double iy = 0.5 * (mean(rp, c) - mean(rm, c));
                res(r, c) = ix * flow.x(r, c) + iy * flow.y(r, c) + (b(r, c) - a(r, c));
            }
        out.push_back(std::move(res));
    }
    return out;
}

std::vector<RealGrid> characteristic_residual(const FrameSequence& seq, const FlowField& flow) {
    seq.validate();
    if (flow.varying() || !is_integer(flow.vx) || !is_integer(flow.vy))
        throw std::invalid_argument("characteristic_residual: needs a constant integer flow");
    std::vector<RealGrid> out;
    for (std::size_t t = 0; t + 1 < seq.frames.size(); ++t) {
        RealGrid moved = circular_shift(seq.frames[t], static_cast<long>(flow.vy),
                                        static_cast<long>(flow.vx));
        const RealGrid& next = seq.frames[t + 1];
        for (std::size_t i = 0; i < moved.size(); ++i) moved[i] = next[i] - moved[i];
        out.push_back(std::move(moved));
    }
    return out;
}

RealGrid apply_transform(const RealGrid& f, const Transform& transform) {
    const std::size_t H = f.rows(), W = f.cols();
    if (const auto* conv = std::get_if<Conv>(&transform)) {
        const RealGrid& k = conv->kernel;
        if (k.empty() || k.rows() > H || k.cols() > W)
            throw std::invalid_argument("apply_transform: kernel larger than frame");
        for (double v : k)
            if (!std::isfinite(v)) throw std::invalid_argument("apply_transform: non-finite kernel");
        const long cy = static_cast<long>(k.rows() / 2), cx = static_cast<long>(k.cols() / 2);
        RealGrid out(H, W, 0.0);
        for (std::size_t r = 0; r < H; ++r)
            for (std::size_t c = 0; c < W; ++c) {
                double s = 0.0;
                for (std::size_t i = 0; i < k.rows(); ++i)
                    for (std::size_t j = 0; j < k.cols(); ++j)
                        s += k(i, j) * f(wrap(static_cast<long>(r) - static_cast<long>(i) + cy, H),
                                         wrap(static_cast<long>(c) - static_cast<long>(j) + cx, W));
                out(r, c) = s;
            }
        return out;
    }
    if (const auto* pw = std::get_if<Pointwise>(&transform)) {
        RealGrid out = f;
        for (double& v : out) {
            switch (pw->activation) {
            case Activation::relu: v = std::max(v, 0.0); break;
            case Activation::sigmoid: v = 1.0 / (1.0 + std::exp(-v)); break;
            case Activation::tanh: v = std::tanh(v); break;
            }
        }
        return out;
    }
    if (const auto* lm = std::get_if<LocalMax>(&transform)) {
        if (lm->half_window < 0) throw std::invalid_argument("apply_transform: negative half-window");
        const long h = lm->half_window;
        if (static_cast<std::size_t>(2 * h + 1) > std::min(H, W))
            throw std::invalid_argument("apply_transform: window larger than frame");
        RealGrid out(H, W);
        for (std::size_t r = 0; r < H; ++r)
            for (std::size_t c = 0; c < W; ++c) {
                double m = -std::numeric_limits<double>::infinity();
                for (long dy = -h; dy <= h; ++dy)
                    for (long dx = -h; dx <= h; ++dx)
                        m = std::max(m, f(wrap(static_cast<long>(r) + dy, H), wrap(static_cast<long>(c) + dx, W)));
                out(r, c) = m;
            }
        return out;
    }
    const auto& ds = std::get<Downscale>(transform);
    if (ds.sx < 1 || ds.sy < 1) throw std::invalid_argument("apply_transform: factors must be >= 1");
    const auto sx = static_cast<std::size_t>(ds.sx), sy = static_cast<std::size_t>(ds.sy);
    if (H % sy != 0 || W % sx != 0)
        throw std::invalid_argument("apply_transform: downscale factor must divide the frame size");
    RealGrid out(H / sy, W / sx);
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = f(r * sy, c * sx);
    return out;
}

FrameSequence apply_transform(const FrameSequence& seq, const Transform& transform) {
    FrameSequence out;
    out.frames.reserve(seq.frames.size());
    for (const auto& f : seq.frames) out.frames.push_back(apply_transform(f, transform));
    return out;
}

FlowField predicted_flow(const Transform& transform, const FlowField& flow) {
    const auto* ds = std::get_if<Downscale>(&transform);
    if (!ds) return flow;
    if (flow.varying()) {
        // Resample the maps the same way the frames are resampled.
        return {0.0, 0.0,
                apply_transform(flow.vx_map, transform), apply_transform(flow.vy_map, transform)};
    }
    return FlowField::constant(flow.vx / ds->sx, flow.vy / ds->sy);
}

double gradient_scale(const FrameSequence& seq) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& f : seq.frames) {
        const std::size_t H = f.rows(), W = f.cols();
        for (std::size_t r = 0; r < H; ++r)
            for (std::size_t c = 0; c < W; ++c) {
                const double gx = 0.5 * (f(r, wrap(static_cast<long>(c) + 1, W)) - f(r, wrap(static_cast<long>(c) - 1, W)));
                const double gy = 0.5 * (f(wrap(static_cast<long>(r) + 1, H), c) - f(wrap(static_cast<long>(r) - 1, H), c));
                sum += std::hypot(gx, gy);
                ++n;
            }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

ResidualStats stats(const std::vector<RealGrid>& residuals, double scale) {
    ResidualStats s;
    double sq = 0.0;
    std::size_t n = 0;
    for (const auto& g : residuals)
        for (double v : g) {
            s.max = std::max(s.max, std::abs(v));
            sq += v * v;
            ++n;
        }
    s.rms = n ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
    const double norm = scale + 1e-12;
    s.max /= norm;
    s.rms /= norm;
    return s;
}

std::vector<InvarianceRow> invariance_report(const FrameSequence& seq, const FlowField& flow,
                                             const std::vector<Transform>& transforms,
                                             double tolerance) {
    seq.validate();
    std::vector<InvarianceRow> rows;
    for (const auto& t : transforms) {
        const FrameSequence out = apply_transform(seq, t);
        const FlowField predicted = predicted_flow(t, flow);
        const double scale = gradient_scale(out);

        InvarianceRow row;
        row.transform = name(t);
        row.residual = stats(characteristic_residual(out, predicted), scale);
        row.differential = stats(flow_residual(out, predicted), scale);
        row.pass = row.residual.max < tolerance;
        if (std::holds_alternative<Downscale>(t)) {
            row.unscaled = stats(characteristic_residual(out, flow), scale);
            row.pass = row.pass && row.unscaled.max > 0.0 &&
                       row.unscaled.max >= 100.0 * row.residual.max;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace lpc::flow
