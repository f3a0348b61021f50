#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <future>
#include <string>
#include <thread>

#include "lpc/error.hpp"
#include "lpc/packet.hpp"

namespace lpc {

namespace {

constexpr std::size_t kMaxDatagram = 65507;
// Sent after the last data packet so the receiver knows the frame is over.
constexpr std::uint8_t kEndMarker[4] = {0x4C, 0x45, 0x4E, 0x44};
constexpr int kIdleTimeoutMs = 2000;

class Socket {
public:
    Socket() : fd_{::socket(AF_INET, SOCK_DGRAM, 0)} {
        if (fd_ < 0) fail("socket");
    }
    ~Socket() {
        if (fd_ >= 0) ::close(fd_);
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    int fd() const { return fd_; }

    [[noreturn]] static void fail(const char* what) {
        throw TransportError(std::string(what) + ": " + std::strerror(errno));
    }

private:
    int fd_;
};

sockaddr_in loopback(std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    return addr;
}

std::vector<Packet> receive_all(const Socket& sock) {
    std::vector<Packet> received;
    std::vector<std::uint8_t> buf(kMaxDatagram);
    for (;;) {
        pollfd pfd{sock.fd(), POLLIN, 0};
        const int ready = ::poll(&pfd, 1, kIdleTimeoutMs);
        if (ready < 0) {
            if (errno == EINTR) continue;
            Socket::fail("poll");
        }
        if (ready == 0) break;  // sender went quiet without an end marker
        const ssize_t n = ::recv(sock.fd(), buf.data(), buf.size(), 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            Socket::fail("recv");
        }
        if (n == sizeof(kEndMarker) && std::memcmp(buf.data(), kEndMarker, sizeof(kEndMarker)) == 0)
            break;
        received.push_back(parse_packet({buf.data(), static_cast<std::size_t>(n)}));
    }
    return received;
}

}  // namespace

std::vector<Packet> transport_loopback(std::span<const Packet> packets,
                                       const ChannelConfig& config) {
    for (const Packet& p : packets)
        if (kWireHeaderBytes + p.payload.size() > kMaxDatagram)
            throw TransportError("packet of " + std::to_string(p.payload.size()) +
                                 " payload bytes does not fit in one datagram");

    Socket rx;
    int bufsize = 16 << 20;
    // SO_RCVBUFFORCE needs CAP_NET_ADMIN; the plain option is capped by rmem_max.
    if (::setsockopt(rx.fd(), SOL_SOCKET, SO_RCVBUFFORCE, &bufsize, sizeof bufsize) != 0)
        ::setsockopt(rx.fd(), SOL_SOCKET, SO_RCVBUF, &bufsize, sizeof bufsize);
    sockaddr_in addr = loopback(0);
    if (::bind(rx.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) Socket::fail("bind");
    socklen_t len = sizeof addr;
    if (::getsockname(rx.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0)
        Socket::fail("getsockname");

    auto receiver = std::async(std::launch::async, [&rx] { return receive_all(rx); });

    const auto lost = loss_pattern(packets.size(), config);
    {
        Socket tx;
        auto send = [&](const std::uint8_t* data, std::size_t size) {
            if (::sendto(tx.fd(), data, size, 0, reinterpret_cast<const sockaddr*>(&addr),
                         sizeof addr) < 0)
                Socket::fail("sendto");
        };
        // Loss decisions are drawn in seq order, independent of input order.
        std::vector<std::size_t> order(packets.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return packets[a].seq < packets[b].seq;
        });
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (lost[k]) continue;
            const auto wire = serialize(packets[order[k]]);
            send(wire.data(), wire.size());
            // Give the receiver a chance to drain on a single core.
            std::this_thread::yield();
        }
        send(kEndMarker, sizeof kEndMarker);
    }
    return receiver.get();
}

}  // namespace lpc
