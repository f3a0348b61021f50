#include "lpc/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace lpc {

namespace {

/// Separable Gaussian blur with clamp-to-edge borders.
std::vector<double> blur(const std::vector<double>& in, std::size_t H, std::size_t W, double sigma) {
    const int radius = static_cast<int>(std::ceil(3 * sigma));
    std::vector<double> k(2 * static_cast<std::size_t>(radius) + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i)
        sum += k[static_cast<std::size_t>(i + radius)] = std::exp(-i * i / (2 * sigma * sigma));
    for (double& v : k) v /= sum;

    auto clamp_index = [](long i, std::size_t n) {
        return static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(n) - 1));
    };
    std::vector<double> tmp(H * W, 0.0), out(H * W, 0.0);
    for (std::size_t r = 0; r < H; ++r)
        for (std::size_t c = 0; c < W; ++c)
            for (int i = -radius; i <= radius; ++i)
                tmp[r * W + c] += k[static_cast<std::size_t>(i + radius)] *
                                  in[r * W + clamp_index(static_cast<long>(c) + i, W)];
    for (std::size_t r = 0; r < H; ++r)
        for (std::size_t c = 0; c < W; ++c)
            for (int i = -radius; i <= radius; ++i)
                out[r * W + c] += k[static_cast<std::size_t>(i + radius)] *
                                  tmp[clamp_index(static_cast<long>(r) + i, H) * W + c];
    return out;
}

}  // namespace

FeatureTensor synth_tensor(CorpusKind kind, std::size_t channels, std::size_t height,
                           std::size_t width, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    FeatureTensor out(channels, height, width);
    std::vector<double> plane(height * width);

    for (std::size_t ch = 0; ch < channels; ++ch) {
        if (kind == CorpusKind::smoothed_noise) {
            std::normal_distribution<double> n01(0.0, 1.0);
            for (double& v : plane) v = n01(rng);
            const auto smooth = blur(plane, height, width, 3.0);
            // Blurring shrinks the variance by about 1 / (4 pi sigma^2); undo it.
            const double gain = std::sqrt(4.0 * std::numbers::pi * 9.0);
            for (std::size_t i = 0; i < plane.size(); ++i)
                plane[i] = std::max(0.0, gain * smooth[i]);
        } else {
            std::uniform_int_distribution<int> count(3, 8);
            std::uniform_real_distribution<double> cy(0.0, static_cast<double>(height));
            std::uniform_real_distribution<double> cx(0.0, static_cast<double>(width));
            std::uniform_real_distribution<double> sig(2.0, 8.0);
            std::uniform_real_distribution<double> amp(0.5, 4.0);
            std::fill(plane.begin(), plane.end(), 0.0);
            const int n = count(rng);
            for (int b = 0; b < n; ++b) {
                const double y0 = cy(rng), x0 = cx(rng), s = sig(rng), a = amp(rng);
                for (std::size_t r = 0; r < height; ++r)
                    for (std::size_t c = 0; c < width; ++c) {
                        const double dy = static_cast<double>(r) - y0, dx = static_cast<double>(c) - x0;
                        plane[r * width + c] += a * std::exp(-(dx * dx + dy * dy) / (2 * s * s));
                    }
            }
        }
        auto dst = out.channel(ch);
        for (std::size_t i = 0; i < plane.size(); ++i) dst[i] = static_cast<float>(plane[i]);
    }
    return out;
}

std::vector<CorpusEntry> synth_corpus(const CorpusSpec& spec) {
    std::vector<CorpusEntry> corpus;
    corpus.reserve(spec.count);
    for (std::size_t i = 0; i < spec.count; ++i) {
        const auto kind = i % 2 == 0 ? CorpusKind::smoothed_noise : CorpusKind::bumps;
        const std::string name = std::string(kind == CorpusKind::smoothed_noise ? "noise" : "bumps") +
                                 "_" + std::to_string(i);
        corpus.push_back({name, synth_tensor(kind, spec.channels, spec.height, spec.width, spec.seed + i)});
    }
    return corpus;
}

}  // namespace lpc
