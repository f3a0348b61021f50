#include "lpc/packet.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

#include "lpc/error.hpp"

namespace lpc {

void ChannelConfig::validate() const {
    if (!(loss_probability >= 0.0 && loss_probability <= 1.0))
        throw std::invalid_argument("loss probability must lie in [0, 1], got " +
                                    std::to_string(loss_probability));
}

std::vector<Packet> packetize(const ByteGrid& bytes, const QuantParams& params,
                              std::uint32_t frame_id) {
    if (bytes.rows() % kRowsPerPacket != 0)
        throw std::invalid_argument("packetize: mosaic height " + std::to_string(bytes.rows()) +
                                    " is not a multiple of 8");
    const std::size_t total = bytes.rows() / kRowsPerPacket;
    if (total > std::numeric_limits<std::uint16_t>::max() ||
        bytes.cols() > std::numeric_limits<std::uint16_t>::max() ||
        (total > 0 && (total - 1) * kRowsPerPacket > std::numeric_limits<std::uint16_t>::max()))
        throw std::invalid_argument("packetize: mosaic too large for the packet header");

    std::vector<Packet> packets;
    packets.reserve(total);
    const std::size_t slab = kRowsPerPacket * bytes.cols();
    for (std::size_t seq = 0; seq < total; ++seq) {
        Packet p;
        p.frame_id = frame_id;
        p.seq = static_cast<std::uint16_t>(seq);
        p.total = static_cast<std::uint16_t>(total);
        p.row_offset = static_cast<std::uint16_t>(seq * kRowsPerPacket);
        p.width = static_cast<std::uint16_t>(bytes.cols());
        p.lo = static_cast<float>(params.lo);
        p.hi = static_cast<float>(params.hi);
        const auto first = bytes.begin() + static_cast<std::ptrdiff_t>(seq * slab);
        p.payload.assign(first, first + static_cast<std::ptrdiff_t>(slab));
        packets.push_back(std::move(p));
    }
    return packets;
}

std::vector<bool> loss_pattern(std::size_t packet_count, const ChannelConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.rng_seed);
    std::vector<bool> lost(packet_count);
    for (std::size_t i = 0; i < packet_count; ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        lost[i] = u < config.loss_probability;
    }
    return lost;
}

std::vector<Packet> drop(std::span<const Packet> packets, const ChannelConfig& config) {
    std::vector<std::size_t> order(packets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return packets[a].seq < packets[b].seq; });
    const auto lost = loss_pattern(packets.size(), config);

    std::vector<bool> keep(packets.size());
    for (std::size_t k = 0; k < order.size(); ++k) keep[order[k]] = !lost[k];
    std::vector<Packet> survivors;
    for (std::size_t i = 0; i < packets.size(); ++i)
        if (keep[i]) survivors.push_back(packets[i]);
    return survivors;
}

Reassembly reassemble(std::span<const Packet> survivors, std::size_t expected_total,
                      std::size_t rows, std::size_t cols) {
    if (rows != expected_total * kRowsPerPacket)
        throw std::invalid_argument("reassemble: " + std::to_string(rows) +
                                    " rows cannot be covered by " +
                                    std::to_string(expected_total) + " packets");
    Reassembly out{ByteGrid(rows, cols, 0), MaskGrid(rows, cols, 1), QuantParams{}, {}};
    if (survivors.empty()) return out;

    const Packet& ref = survivors.front();
    out.params = {ref.lo, ref.hi};
    std::vector<bool> seen(expected_total, false);
    for (const Packet& p : survivors) {
        if (p.frame_id != ref.frame_id || p.lo != ref.lo || p.hi != ref.hi)
            throw FormatError("reassemble: conflicting headers within one frame");
        if (p.total != expected_total || p.width != cols || p.rows != kRowsPerPacket)
            throw FormatError("reassemble: packet geometry does not match the mosaic");
        if (p.seq >= p.total || p.row_offset != p.seq * kRowsPerPacket)
            throw FormatError("reassemble: inconsistent seq/row_offset in packet " +
                              std::to_string(p.seq));
        if (p.payload.size() != std::size_t{p.rows} * p.width)
            throw FormatError("reassemble: payload length mismatch in packet " +
                              std::to_string(p.seq));
        if (seen[p.seq]) {
            out.duplicate_seqs.push_back(p.seq);
            continue;
        }
        seen[p.seq] = true;
        std::copy(p.payload.begin(), p.payload.end(), &out.bytes(p.row_offset, 0));
        std::fill_n(&out.mask(p.row_offset, 0), p.payload.size(), std::uint8_t{0});
    }
    return out;
}

namespace {

template <typename T>
void put_be(std::vector<std::uint8_t>& out, T value) {
    for (int shift = 8 * (static_cast<int>(sizeof(T)) - 1); shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(value >> shift));
}

template <typename T>
T get_be(const std::uint8_t*& p) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v = static_cast<T>(v << 8 | *p++);
    return v;
}

}  // namespace

std::vector<std::uint8_t> serialize(const Packet& packet) {
    std::vector<std::uint8_t> out;
    out.reserve(kWireHeaderBytes + packet.payload.size());
    put_be<std::uint16_t>(out, kWireMagic);
    put_be<std::uint8_t>(out, kWireVersion);
    put_be<std::uint32_t>(out, packet.frame_id);
    put_be<std::uint16_t>(out, packet.seq);
    put_be<std::uint16_t>(out, packet.total);
    put_be<std::uint16_t>(out, packet.row_offset);
    put_be<std::uint8_t>(out, packet.rows);
    put_be<std::uint16_t>(out, packet.width);
    put_be<std::uint32_t>(out, std::bit_cast<std::uint32_t>(packet.lo));
    put_be<std::uint32_t>(out, std::bit_cast<std::uint32_t>(packet.hi));
    out.insert(out.end(), packet.payload.begin(), packet.payload.end());
    return out;
}

Packet parse_packet(std::span<const std::uint8_t> datagram) {
    if (datagram.size() < kWireHeaderBytes)
        throw FormatError("packet: datagram shorter than the packet header");
    const std::uint8_t* p = datagram.data();
    if (get_be<std::uint16_t>(p) != kWireMagic) throw FormatError("packet: bad magic");
    if (get_be<std::uint8_t>(p) != kWireVersion) throw FormatError("packet: unsupported version");
    Packet out;
    out.frame_id = get_be<std::uint32_t>(p);
    out.seq = get_be<std::uint16_t>(p);
    out.total = get_be<std::uint16_t>(p);
    out.row_offset = get_be<std::uint16_t>(p);
    out.rows = get_be<std::uint8_t>(p);
    out.width = get_be<std::uint16_t>(p);
    out.lo = std::bit_cast<float>(get_be<std::uint32_t>(p));
    out.hi = std::bit_cast<float>(get_be<std::uint32_t>(p));
    const std::size_t expected = std::size_t{out.rows} * out.width;
    if (datagram.size() - kWireHeaderBytes != expected)
        throw FormatError("packet: payload is " + std::to_string(datagram.size() - kWireHeaderBytes) +
                          " bytes, header implies " + std::to_string(expected));
    out.payload.assign(datagram.begin() + kWireHeaderBytes, datagram.end());
    return out;
}

}  // namespace lpc
