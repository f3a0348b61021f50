#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lpc/grid.hpp"
#include "lpc/tensor.hpp"

namespace lpc {

inline constexpr std::size_t kRowsPerPacket = 8;
inline constexpr std::uint16_t kWireMagic = 0x4C50;
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kWireHeaderBytes = 2 + 1 + 4 + 2 + 2 + 2 + 1 + 2 + 4 + 4;

/// One 8-row slab of a quantized mosaic.
struct Packet {
    std::uint32_t frame_id = 0;
    std::uint16_t seq = 0;
    std::uint16_t total = 0;
    std::uint16_t row_offset = 0;
    std::uint8_t rows = kRowsPerPacket;
    std::uint16_t width = 0;
    float lo = 0.0f;
    float hi = 0.0f;
    std::vector<std::uint8_t> payload;

    friend bool operator==(const Packet&, const Packet&) = default;
};

struct ChannelConfig {
    double loss_probability = 0.0;
    std::uint64_t rng_seed = 0;

    /// Throws std::invalid_argument unless 0 <= p <= 1.
    void validate() const;
};

/// Splits the byte mosaic into height/8 packets, ascending seq.
/// Throws std::invalid_argument when the height is not a multiple of 8 or a header
/// field would overflow.
std::vector<Packet> packetize(const ByteGrid& bytes, const QuantParams& params,
                              std::uint32_t frame_id);

/// Per-seq loss decisions: std::mt19937_64 seeded with rng_seed, one draw per packet in
/// seq order, u = (draw >> 11) * 2^-53, lost iff u < p.
std::vector<bool> loss_pattern(std::size_t packet_count, const ChannelConfig& config);

/// Removes packets independently with probability p. Deterministic in (seed, p, count).
std::vector<Packet> drop(std::span<const Packet> packets, const ChannelConfig& config);

struct Reassembly {
    ByteGrid bytes;
    MaskGrid mask;  // 1 = row lost
    QuantParams params;
    std::vector<std::uint16_t> duplicate_seqs;
};

/// Rebuilds the holed mosaic from whatever arrived, in any order. Throws FormatError on
/// headers that conflict with each other or with the expected geometry.
Reassembly reassemble(std::span<const Packet> survivors, std::size_t expected_total,
                      std::size_t rows, std::size_t cols);

std::vector<std::uint8_t> serialize(const Packet& packet);
/// Throws FormatError on a short buffer, bad magic/version or payload length mismatch.
Packet parse_packet(std::span<const std::uint8_t> datagram);

/// Sends the packets over a loopback UDP socket, dropping the ones loss_pattern marks
/// before they reach the wire, and returns whatever the receiver parsed, in arrival
/// order. Socket failures throw TransportError.
std::vector<Packet> transport_loopback(std::span<const Packet> packets,
                                       const ChannelConfig& config);

}  // namespace lpc
