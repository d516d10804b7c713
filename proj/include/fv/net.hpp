#pragma once

#include <arpa/inet.h>

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <functional>
#include <stdexcept>
#include <string>

namespace fv {

// IPv4 or IPv6 address as a fixed 16-byte value (v4 occupies the first 4 bytes).
struct IpAddr {
    std::array<uint8_t, 16> bytes{};
    bool v6 = false;

    auto operator<=>(const IpAddr&) const = default;

    static IpAddr v4(uint32_t host_order) {
        IpAddr a;
        a.bytes[0] = uint8_t(host_order >> 24);
        a.bytes[1] = uint8_t(host_order >> 16);
        a.bytes[2] = uint8_t(host_order >> 8);
        a.bytes[3] = uint8_t(host_order);
        return a;
    }

    static IpAddr parse(const std::string& s) {
        IpAddr a;
        if (s.find(':') != std::string::npos) {
            a.v6 = true;
            if (inet_pton(AF_INET6, s.c_str(), a.bytes.data()) != 1)
                throw std::invalid_argument("bad IPv6 address: " + s);
        } else {
            if (inet_pton(AF_INET, s.c_str(), a.bytes.data()) != 1)
                throw std::invalid_argument("bad IPv4 address: " + s);
        }
        return a;
    }

    std::string str() const {
        char buf[INET6_ADDRSTRLEN] = {};
        if (v6)
            inet_ntop(AF_INET6, bytes.data(), buf, sizeof(buf));
        else
            inet_ntop(AF_INET, bytes.data(), buf, sizeof(buf));
        return buf;
    }
};

inline uint64_t hash_mix(uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

inline uint64_t hash_addr(const IpAddr& a) {
    uint64_t lo, hi;
    std::memcpy(&lo, a.bytes.data(), 8);
    std::memcpy(&hi, a.bytes.data() + 8, 8);
    return hash_mix(lo ^ hash_mix(hi ^ (a.v6 ? 0x9e3779b97f4a7c15ULL : 0)));
}

enum class L4Proto : uint8_t { TCP = 0, UDP = 1, ICMP = 2, OTHER = 3 };

inline const char* proto_name(L4Proto p) {
    switch (p) {
        case L4Proto::TCP: return "TCP";
        case L4Proto::UDP: return "UDP";
        case L4Proto::ICMP: return "ICMP";
        default: return "OTHER";
    }
}

// TCP flag bits as carried in the packet header (FIN..CWR = bits 0..7).
namespace tcpflag {
constexpr uint8_t fin = 0x01, syn = 0x02, rst = 0x04, psh = 0x08;
constexpr uint8_t ack = 0x10, urg = 0x20, ece = 0x40, cwr = 0x80;
} // namespace tcpflag

struct PacketRecord {
    double timestamp = 0.0; // seconds since epoch
    IpAddr src_addr;
    IpAddr dst_addr;
    uint16_t src_port = 0;
    uint16_t dst_port = 0;
    L4Proto l4_protocol = L4Proto::OTHER;
    uint8_t tcp_flags = 0; // 0 unless TCP
    uint32_t length = 0;   // IP total length in bytes
};

// Protocol mask layout: bits 0..3 one-hot protocol, bits 8..15 TCP flag bits.
struct PerPacketFeature {
    uint16_t protocol_mask = 0;
    uint32_t length = 0;
    double interval = 0.0; // seconds since previous packet of the same flow
};

inline uint16_t protocol_mask_of(L4Proto proto, uint8_t tcp_flags) {
    uint16_t m = uint16_t(1u << uint16_t(proto));
    m |= uint16_t(uint16_t(tcp_flags) << 8);
    return m;
}

inline PerPacketFeature featurize(const PacketRecord& pkt, const double* prev_ts_same_flow) {
    PerPacketFeature f;
    f.protocol_mask = protocol_mask_of(pkt.l4_protocol, pkt.tcp_flags);
    f.length = pkt.length;
    if (prev_ts_same_flow != nullptr) {
        double iv = pkt.timestamp - *prev_ts_same_flow;
        f.interval = iv > 0.0 ? iv : 0.0; // clamp out-of-order arrivals
    }
    return f;
}

inline bool operator==(const PerPacketFeature& a, const PerPacketFeature& b) {
    return a.protocol_mask == b.protocol_mask && a.length == b.length && a.interval == b.interval;
}

} // namespace fv

template <>
struct std::hash<fv::IpAddr> {
    size_t operator()(const fv::IpAddr& a) const { return size_t(fv::hash_addr(a)); }
};
