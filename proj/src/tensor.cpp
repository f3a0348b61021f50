#include "lpc/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "lpc/error.hpp"

namespace lpc {

FeatureTensor::FeatureTensor(std::size_t channels, std::size_t height, std::size_t width,
                             float fill)
    : channels_{channels}, height_{height}, width_{width},
      data_(channels * height * width, fill) {}

FeatureTensor::FeatureTensor(std::size_t channels, std::size_t height, std::size_t width,
                             std::vector<float> data)
    : channels_{channels}, height_{height}, width_{width}, data_(std::move(data)) {
    if (data_.size() != channels_ * height_ * width_)
        throw std::invalid_argument("FeatureTensor: data size does not match dimensions");
}

void FeatureTensor::validate() const {
    if (channels_ == 0 || height_ == 0 || width_ == 0)
        throw std::invalid_argument("FeatureTensor: dimensions must be positive");
    if (data_.size() != channels_ * height_ * width_)
        throw std::invalid_argument("FeatureTensor: data size does not match dimensions");
    for (float v : data_)
        if (!std::isfinite(v)) throw std::invalid_argument("FeatureTensor: non-finite value");
}

MosaicLayout square_layout(std::size_t channels, std::size_t channel_height,
                           std::size_t channel_width) {
    std::size_t side = 1;
    while (side * side < channels) ++side;
    return {side, side, channel_height, channel_width, channels};
}

void Mosaic::validate() const {
    if (layout.tile_rows * layout.tile_cols < layout.original_channels)
        throw std::invalid_argument("Mosaic: layout has fewer tiles than channels");
    if (!grid.same_shape(layout.mosaic_height(), layout.mosaic_width()))
        throw std::invalid_argument("Mosaic: grid is " + std::to_string(grid.rows()) + "x" +
                                    std::to_string(grid.cols()) + " but layout implies " +
                                    std::to_string(layout.mosaic_height()) + "x" +
                                    std::to_string(layout.mosaic_width()));
}

MaskGrid channel_coverage(const MosaicLayout& layout) {
    MaskGrid covered(layout.mosaic_height(), layout.mosaic_width(), 0);
    for (std::size_t k = 0; k < layout.original_channels; ++k) {
        const std::size_t r0 = (k / layout.tile_cols) * layout.channel_height;
        const std::size_t c0 = (k % layout.tile_cols) * layout.channel_width;
        for (std::size_t r = 0; r < layout.channel_height; ++r)
            std::fill_n(&covered(r0 + r, c0), layout.channel_width, std::uint8_t{1});
    }
    return covered;
}

Mosaic tile(const FeatureTensor& tensor) {
    tensor.validate();
    const MosaicLayout layout = square_layout(tensor.channels(), tensor.height(), tensor.width());
    RealGrid grid(layout.mosaic_height(), layout.mosaic_width(), 0.0);
    for (std::size_t k = 0; k < tensor.channels(); ++k) {
        const std::size_t r0 = (k / layout.tile_cols) * layout.channel_height;
        const std::size_t c0 = (k % layout.tile_cols) * layout.channel_width;
        for (std::size_t r = 0; r < tensor.height(); ++r)
            for (std::size_t c = 0; c < tensor.width(); ++c)
                grid(r0 + r, c0 + c) = tensor.at(k, r, c);
    }
    return {std::move(grid), layout};
}

FeatureTensor untile(const Mosaic& mosaic) {
    mosaic.validate();
    const auto& L = mosaic.layout;
    FeatureTensor out(L.original_channels, L.channel_height, L.channel_width);
    for (std::size_t k = 0; k < L.original_channels; ++k) {
        const std::size_t r0 = (k / L.tile_cols) * L.channel_height;
        const std::size_t c0 = (k % L.tile_cols) * L.channel_width;
        for (std::size_t r = 0; r < L.channel_height; ++r)
            for (std::size_t c = 0; c < L.channel_width; ++c)
                out.at(k, r, c) = static_cast<float>(mosaic.grid(r0 + r, c0 + c));
    }
    return out;
}

std::vector<std::uint8_t> untile_mask(const MaskGrid& mask, const MosaicLayout& L) {
    if (!mask.same_shape(L.mosaic_height(), L.mosaic_width()))
        throw std::invalid_argument("untile_mask: mask does not match layout");
    std::vector<std::uint8_t> out(L.original_channels * L.channel_height * L.channel_width);
    std::size_t i = 0;
    for (std::size_t k = 0; k < L.original_channels; ++k) {
        const std::size_t r0 = (k / L.tile_cols) * L.channel_height;
        const std::size_t c0 = (k % L.tile_cols) * L.channel_width;
        for (std::size_t r = 0; r < L.channel_height; ++r)
            for (std::size_t c = 0; c < L.channel_width; ++c) out[i++] = mask(r0 + r, c0 + c);
    }
    return out;
}

Quantized quantize(const RealGrid& grid) {
    if (grid.empty()) return {ByteGrid(grid.rows(), grid.cols()), {}};
    const auto [mn, mx] = std::minmax_element(grid.begin(), grid.end());
    const QuantParams params{*mn, *mx};
    ByteGrid bytes(grid.rows(), grid.cols(), 0);
    if (params.hi > params.lo) {
        const double scale = 255.0 / (params.hi - params.lo);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            // std::round is round-half-away-from-zero.
            const double q = std::round((grid[i] - params.lo) * scale);
            bytes[i] = static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
        }
    }
    return {std::move(bytes), params};
}

RealGrid dequantize(const ByteGrid& bytes, const QuantParams& params) {
    RealGrid out(bytes.rows(), bytes.cols(), params.lo);
    if (params.hi > params.lo) {
        const double step = (params.hi - params.lo) / 255.0;
        for (std::size_t i = 0; i < bytes.size(); ++i) out[i] = params.lo + bytes[i] * step;
    }
    return out;
}

double gray_scale(const QuantParams& params) noexcept {
    return params.hi > params.lo ? 255.0 / (params.hi - params.lo) : 1.0;
}

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
           std::uint32_t{p[3]} << 24;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const FeatureTensor& tensor) {
    const auto limit = std::numeric_limits<std::uint32_t>::max();
    if (tensor.channels() > limit || tensor.height() > limit || tensor.width() > limit)
        throw std::invalid_argument("encode_tensor: dimension exceeds u32");
    std::vector<std::uint8_t> out;
    out.reserve(kTensorHeaderBytes + 4 * tensor.size());
    out.insert(out.end(), std::begin(kTensorMagic), std::end(kTensorMagic));
    put_u16(out, kTensorVersion);
    put_u32(out, static_cast<std::uint32_t>(tensor.channels()));
    put_u32(out, static_cast<std::uint32_t>(tensor.height()));
    put_u32(out, static_cast<std::uint32_t>(tensor.width()));
    for (float v : tensor.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

FeatureTensor decode_tensor(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kTensorHeaderBytes)
        throw FormatError("LTNS: header truncated (" + std::to_string(bytes.size()) + " bytes)");
    if (std::memcmp(bytes.data(), kTensorMagic, 4) != 0)
        throw FormatError("LTNS: bad magic");
    const std::uint16_t version = static_cast<std::uint16_t>(bytes[4] | bytes[5] << 8);
    if (version != kTensorVersion)
        throw FormatError("LTNS: unsupported version " + std::to_string(version));
    const std::uint64_t c = get_u32(bytes.data() + 6);
    const std::uint64_t h = get_u32(bytes.data() + 10);
    const std::uint64_t w = get_u32(bytes.data() + 14);
    if (c == 0 || h == 0 || w == 0) throw FormatError("LTNS: zero dimension");
    // Each factor < 2^32, so c*h fits in 64 bits; guard the next multiply.
    const std::uint64_t ch = c * h;
    if (ch > std::numeric_limits<std::uint64_t>::max() / w / 4)
        throw FormatError("LTNS: dimension overflow");
    const std::uint64_t count = ch * w;
    const std::uint64_t payload = bytes.size() - kTensorHeaderBytes;
    if (payload < count * 4)
        throw FormatError("LTNS: payload truncated, expected " + std::to_string(count * 4) +
                          " bytes, found " + std::to_string(payload));
    if (payload > count * 4) throw FormatError("LTNS: trailing bytes after payload");

    std::vector<float> data(count);
    const std::uint8_t* p = bytes.data() + kTensorHeaderBytes;
    for (std::uint64_t i = 0; i < count; ++i, p += 4) data[i] = std::bit_cast<float>(get_u32(p));
    return FeatureTensor(c, h, w, std::move(data));
}

void write_tensor(const std::filesystem::path& path, const FeatureTensor& tensor) {
    const auto bytes = encode_tensor(tensor);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

FeatureTensor read_tensor(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    return decode_tensor(bytes);
}

void write_pgm(const std::filesystem::path& path, const ByteGrid& image,
               const std::vector<std::string>& comments) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "P5\n";
    for (const auto& c : comments) out << "# " << c << '\n';
    out << image.cols() << ' ' << image.rows() << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.data()),
              static_cast<std::streamsize>(image.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

PgmImage read_pgm(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    std::size_t pos = 0;
    PgmImage result;

    auto skip_space_and_comments = [&] {
        while (pos < bytes.size()) {
            if (std::isspace(bytes[pos])) {
                ++pos;
            } else if (bytes[pos] == '#') {
                const std::size_t start = pos + 1;
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
                std::string line(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                                 bytes.begin() + static_cast<std::ptrdiff_t>(pos));
                if (!line.empty() && line.front() == ' ') line.erase(0, 1);
                result.comments.push_back(std::move(line));
            } else {
                break;
            }
        }
    };
    auto read_uint = [&]() -> std::size_t {
        skip_space_and_comments();
        std::size_t v = 0;
        bool any = false;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos++] - '0');
            any = true;
            if (v > (std::size_t{1} << 31)) throw FormatError("PGM: header value too large");
        }
        if (!any) throw FormatError("PGM: malformed header in " + path.string());
        return v;
    };

    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
        throw FormatError("PGM: not a binary P5 file: " + path.string());
    pos = 2;
    const std::size_t width = read_uint();
    const std::size_t height = read_uint();
    const std::size_t maxval = read_uint();
    if (maxval != 255) throw FormatError("PGM: only maxval 255 is supported");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError("PGM: bad header");
    ++pos;
    if (bytes.size() - pos < width * height) throw FormatError("PGM: pixel data truncated");
    std::vector<std::uint8_t> pixels(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                     bytes.begin() + static_cast<std::ptrdiff_t>(pos + width * height));
    result.image = ByteGrid(height, width, std::move(pixels));
    return result;
}

}  // namespace lpc
