#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpc/tensor.hpp"

namespace lpc {

/// Synthetic stand-ins for detector features.
///  - smoothed_noise: per-channel white noise blurred with a Gaussian (sigma 3 px),
///    passed through a ReLU so the channel has flat zero regions like real activations.
///  - bumps: a nonnegative mixture of 3 to 8 Gaussian blobs per channel with random
///    centers, widths (sigma 2 to 8 px) and amplitudes (0.5 to 4).
enum class CorpusKind { smoothed_noise, bumps };

FeatureTensor synth_tensor(CorpusKind kind, std::size_t channels, std::size_t height,
                           std::size_t width, std::uint64_t seed);

struct CorpusSpec {
    std::size_t count = 20;
    std::size_t channels = 64;
    std::size_t height = 32;
    std::size_t width = 32;
    std::uint64_t seed = 1;
};

struct CorpusEntry {
    std::string name;
    FeatureTensor tensor;
};

/// Tensor i uses seed (spec.seed + i) and alternates smoothed_noise / bumps.
std::vector<CorpusEntry> synth_corpus(const CorpusSpec& spec);

}  // namespace lpc
