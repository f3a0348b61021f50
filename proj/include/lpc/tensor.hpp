#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lpc/grid.hpp"

namespace lpc {

/// C channels of H x W activations, channel-major then row-major.
/// Values are stored as float32, which is also the on-disk precision.
class FeatureTensor {
public:
    FeatureTensor() = default;
    FeatureTensor(std::size_t channels, std::size_t height, std::size_t width, float fill = 0.0f);
    FeatureTensor(std::size_t channels, std::size_t height, std::size_t width,
                  std::vector<float> data);

    std::size_t channels() const noexcept { return channels_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }

    float& at(std::size_t c, std::size_t r, std::size_t col) {
        return data_[(c * height_ + r) * width_ + col];
    }
    float at(std::size_t c, std::size_t r, std::size_t col) const {
        return data_[(c * height_ + r) * width_ + col];
    }

    std::span<float> channel(std::size_t c) {
        return {data_.data() + c * height_ * width_, height_ * width_};
    }
    std::span<const float> channel(std::size_t c) const {
        return {data_.data() + c * height_ * width_, height_ * width_};
    }

    const std::vector<float>& values() const noexcept { return data_; }
    std::vector<float>& values() noexcept { return data_; }

    /// Throws std::invalid_argument on a zero dimension or a non-finite value.
    void validate() const;

    friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

private:
    std::size_t channels_ = 0;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<float> data_;
};

/// All channels of a tensor laid side by side in one image.
struct MosaicLayout {
    std::size_t tile_rows = 0;
    std::size_t tile_cols = 0;
    std::size_t channel_height = 0;
    std::size_t channel_width = 0;
    std::size_t original_channels = 0;

    std::size_t mosaic_height() const noexcept { return tile_rows * channel_height; }
    std::size_t mosaic_width() const noexcept { return tile_cols * channel_width; }

    friend bool operator==(const MosaicLayout&, const MosaicLayout&) = default;
};

/// Smallest square tile layout holding `channels` tiles of the given size.
MosaicLayout square_layout(std::size_t channels, std::size_t channel_height,
                           std::size_t channel_width);

struct Mosaic {
    RealGrid grid;
    MosaicLayout layout;

    /// Throws std::invalid_argument if grid size and layout disagree.
    void validate() const;
};

/// Mosaic pixels that belong to a real channel (false inside zero padding tiles).
MaskGrid channel_coverage(const MosaicLayout& layout);

struct QuantParams {
    double lo = 0.0;
    double hi = 0.0;
    static constexpr int levels = 256;

    friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

Mosaic tile(const FeatureTensor& tensor);
FeatureTensor untile(const Mosaic& mosaic);

/// Per-pixel mask grid in mosaic layout to per-entry mask in tensor layout.
std::vector<std::uint8_t> untile_mask(const MaskGrid& mask, const MosaicLayout& layout);

struct Quantized {
    ByteGrid bytes;
    QuantParams params;
};

/// Global min/max 8-bit quantization, round half away from zero.
Quantized quantize(const RealGrid& grid);
RealGrid dequantize(const ByteGrid& bytes, const QuantParams& params);

/// Gray-level units: (x - lo) * 255 / (hi - lo); identity scale when hi == lo.
double gray_scale(const QuantParams& params) noexcept;

// LTNS binary tensor format.
inline constexpr char kTensorMagic[4] = {'L', 'T', 'N', 'S'};
inline constexpr std::uint16_t kTensorVersion = 1;
inline constexpr std::size_t kTensorHeaderBytes = 4 + 2 + 4 + 4 + 4;

std::vector<std::uint8_t> encode_tensor(const FeatureTensor& tensor);
FeatureTensor decode_tensor(std::span<const std::uint8_t> bytes);
void write_tensor(const std::filesystem::path& path, const FeatureTensor& tensor);
FeatureTensor read_tensor(const std::filesystem::path& path);

/// Binary PGM (P5, maxval 255). Comment lines are written verbatim after the magic
/// and returned by read_pgm.
void write_pgm(const std::filesystem::path& path, const ByteGrid& image,
               const std::vector<std::string>& comments = {});
struct PgmImage {
    ByteGrid image;
    std::vector<std::string> comments;
};
PgmImage read_pgm(const std::filesystem::path& path);

}  // namespace lpc
