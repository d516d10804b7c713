#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "fv/csv.hpp"
#include "fv/log.hpp"
#include "fv/net.hpp"

namespace fv {

// Read-only pcap ingestion: classic pcap (micro/nano, either endianness) and
// pcapng (SHB/IDB/EPB). Non-IP and truncated frames are skipped and counted.
namespace pcap {

namespace detail {

inline uint16_t rd16(const uint8_t* p, bool swap) {
    uint16_t v;
    std::memcpy(&v, p, 2);
    return swap ? uint16_t((v >> 8) | (v << 8)) : v;
}

inline uint32_t rd32(const uint8_t* p, bool swap) {
    uint32_t v;
    std::memcpy(&v, p, 4);
    return swap ? __builtin_bswap32(v) : v;
}

inline uint16_t be16(const uint8_t* p) { return uint16_t((uint16_t(p[0]) << 8) | p[1]); }

constexpr uint32_t linktype_null = 0;
constexpr uint32_t linktype_ether = 1;
constexpr uint32_t linktype_raw = 101;

// Parses one captured frame into a PacketRecord. Returns false for frames the
// pipeline does not consume (non-IP, truncated, unknown family).
inline bool parse_frame(const uint8_t* data, size_t len, uint32_t linktype, double ts,
                        PacketRecord& out) {
    size_t off = 0;
    bool is_v6 = false;
    if (linktype == linktype_ether) {
        if (len < 14) return false;
        uint16_t ethertype = be16(data + 12);
        off = 14;
        // unwrap up to two VLAN tags
        for (int i = 0; i < 2 && (ethertype == 0x8100 || ethertype == 0x88a8); ++i) {
            if (len < off + 4) return false;
            ethertype = be16(data + off + 2);
            off += 4;
        }
        if (ethertype == 0x0800)
            is_v6 = false;
        else if (ethertype == 0x86dd)
            is_v6 = true;
        else
            return false;
    } else if (linktype == linktype_raw) {
        if (len < 1) return false;
        uint8_t ver = data[0] >> 4;
        if (ver == 4)
            is_v6 = false;
        else if (ver == 6)
            is_v6 = true;
        else
            return false;
    } else if (linktype == linktype_null) {
        if (len < 5) return false;
        uint32_t family;
        std::memcpy(&family, data, 4);
        if (family > 0xffff) family = __builtin_bswap32(family);
        off = 4;
        if (family == 2)
            is_v6 = false;
        else if (family == 24 || family == 28 || family == 30)
            is_v6 = true;
        else
            return false;
    } else {
        return false;
    }

    const uint8_t* ip = data + off;
    size_t iplen = len - off;
    out = PacketRecord{};
    out.timestamp = ts;
    uint8_t l4 = 0;
    size_t l4_off = 0;
    bool have_l4 = true;
    if (!is_v6) {
        if (iplen < 20 || (ip[0] >> 4) != 4) return false;
        size_t ihl = size_t(ip[0] & 0x0f) * 4;
        if (ihl < 20 || iplen < ihl) return false;
        out.length = be16(ip + 2);
        if (out.length == 0) return false;
        l4 = ip[9];
        uint16_t frag = be16(ip + 6);
        if ((frag & 0x1fff) != 0) have_l4 = false; // non-first fragment
        std::memcpy(out.src_addr.bytes.data(), ip + 12, 4);
        std::memcpy(out.dst_addr.bytes.data(), ip + 16, 4);
        l4_off = ihl;
    } else {
        if (iplen < 40 || (ip[0] >> 4) != 6) return false;
        out.length = uint32_t(be16(ip + 4)) + 40;
        l4 = ip[6];
        out.src_addr.v6 = out.dst_addr.v6 = true;
        std::memcpy(out.src_addr.bytes.data(), ip + 8, 16);
        std::memcpy(out.dst_addr.bytes.data(), ip + 24, 16);
        l4_off = 40;
    }

    switch (l4) {
        case 6: out.l4_protocol = L4Proto::TCP; break;
        case 17: out.l4_protocol = L4Proto::UDP; break;
        case 1: out.l4_protocol = L4Proto::ICMP; break;
        case 58: out.l4_protocol = is_v6 ? L4Proto::ICMP : L4Proto::OTHER; break;
        default: out.l4_protocol = L4Proto::OTHER; break;
    }
    if (!have_l4) return true;
    const uint8_t* l4p = ip + l4_off;
    size_t l4len = iplen > l4_off ? iplen - l4_off : 0;
    if (out.l4_protocol == L4Proto::TCP) {
        if (l4len < 14) return false; // truncated TCP header
        out.src_port = be16(l4p);
        out.dst_port = be16(l4p + 2);
        out.tcp_flags = l4p[13];
    } else if (out.l4_protocol == L4Proto::UDP) {
        if (l4len < 4) return false;
        out.src_port = be16(l4p);
        out.dst_port = be16(l4p + 2);
    }
    return true;
}

} // namespace detail

template <typename Sink>
IngestCounters read_classic(std::ifstream& in, const std::string& path, uint32_t magic_raw,
                            Sink&& sink) {
    using namespace detail;
    IngestCounters c;
    bool swap = false;
    double frac_unit = 1e-6;
    switch (magic_raw) {
        case 0xa1b2c3d4u: break;
        case 0xd4c3b2a1u: swap = true; break;
        case 0xa1b23c4du: frac_unit = 1e-9; break;
        case 0x4d3cb2a1u: swap = true; frac_unit = 1e-9; break;
        default: throw IoError(path + ": not a pcap file");
    }
    uint8_t gh[20];
    if (!in.read(reinterpret_cast<char*>(gh), 20)) throw IoError(path + ": truncated pcap header");
    uint32_t linktype = rd32(gh + 16, swap) & 0x0fffffffu;
    std::vector<uint8_t> buf;
    uint8_t rh[16];
    while (in.read(reinterpret_cast<char*>(rh), 16)) {
        uint32_t ts_sec = rd32(rh, swap);
        uint32_t ts_frac = rd32(rh + 4, swap);
        uint32_t incl = rd32(rh + 8, swap);
        if (incl > (1u << 28)) throw IoError(path + ": corrupt record length");
        buf.resize(incl);
        if (incl > 0 && !in.read(reinterpret_cast<char*>(buf.data()), incl)) {
            ++c.skipped;
            FV_WARN("%s: truncated final record", path.c_str());
            break;
        }
        double ts = double(ts_sec) + double(ts_frac) * frac_unit;
        PacketRecord p;
        if (parse_frame(buf.data(), buf.size(), linktype, ts, p)) {
            ++c.records;
            sink(p);
        } else {
            ++c.skipped;
        }
    }
    return c;
}

template <typename Sink>
IngestCounters read_pcapng(std::ifstream& in, const std::string& path, Sink&& sink) {
    using namespace detail;
    IngestCounters c;
    bool swap = false;
    struct Iface {
        uint32_t linktype = 1;
        double tsunit = 1e-6;
    };
    std::vector<Iface> ifaces;
    std::vector<uint8_t> body;
    in.seekg(0);
    uint8_t bh[8];
    while (in.read(reinterpret_cast<char*>(bh), 8)) {
        // block type is endian-free for the SHB; everything else uses the
        // current section's byte order
        uint32_t raw_type;
        std::memcpy(&raw_type, bh, 4);
        bool is_shb = raw_type == 0x0a0d0d0au;
        uint32_t type = is_shb ? raw_type : rd32(bh, swap);
        uint32_t total_len = rd32(bh + 4, swap);
        if (is_shb) {
            // peek byte-order magic to fix endianness, then re-read length
            uint8_t bom[4];
            if (!in.read(reinterpret_cast<char*>(bom), 4)) throw IoError(path + ": truncated SHB");
            uint32_t m;
            std::memcpy(&m, bom, 4);
            if (m == 0x1a2b3c4du)
                swap = false;
            else if (m == 0x4d3c2b1au)
                swap = true;
            else
                throw IoError(path + ": bad pcapng byte-order magic");
            total_len = rd32(bh + 4, swap);
            if (total_len < 28 || total_len % 4 != 0) throw IoError(path + ": corrupt SHB");
            body.resize(total_len - 12);
            if (!in.read(reinterpret_cast<char*>(body.data()), std::streamsize(body.size())))
                throw IoError(path + ": truncated SHB");
            ifaces.clear(); // a new section resets interfaces
            continue;
        }
        if (total_len < 12 || total_len % 4 != 0) throw IoError(path + ": corrupt block");
        body.resize(total_len - 8);
        if (!in.read(reinterpret_cast<char*>(body.data()), std::streamsize(body.size())))
            throw IoError(path + ": truncated block");
        const uint8_t* b = body.data();
        size_t blen = body.size() - 4; // trailing total_len copy
        if (type == 0x00000001u) { // interface description
            if (blen < 8) throw IoError(path + ": corrupt IDB");
            Iface ifc;
            ifc.linktype = rd16(b, swap);
            // options start after linktype/reserved/snaplen
            size_t o = 8;
            while (o + 4 <= blen) {
                uint16_t code = rd16(b + o, swap);
                uint16_t olen = rd16(b + o + 2, swap);
                if (code == 0) break;
                if (code == 9 && olen >= 1) { // if_tsresol
                    uint8_t r = b[o + 4];
                    ifc.tsunit = (r & 0x80) ? std::pow(2.0, -double(r & 0x7f))
                                            : std::pow(10.0, -double(r));
                }
                o += 4 + ((olen + 3u) & ~3u);
            }
            ifaces.push_back(ifc);
        } else if (type == 0x00000006u) { // enhanced packet
            if (blen < 20) throw IoError(path + ": corrupt EPB");
            uint32_t ifid = rd32(b, swap);
            uint64_t ts = (uint64_t(rd32(b + 4, swap)) << 32) | rd32(b + 8, swap);
            uint32_t cap = rd32(b + 12, swap);
            if (20 + cap > blen) {
                ++c.skipped;
                FV_WARN("%s: truncated EPB payload", path.c_str());
                continue;
            }
            Iface ifc = ifid < ifaces.size() ? ifaces[ifid] : Iface{};
            PacketRecord p;
            if (parse_frame(b + 20, cap, ifc.linktype, double(ts) * ifc.tsunit, p)) {
                ++c.records;
                sink(p);
            } else {
                ++c.skipped;
            }
        } else {
            // simple packet blocks carry no timestamp; skip them like other
            // non-packet blocks
            if (type == 0x00000003u) ++c.skipped;
        }
    }
    return c;
}

} // namespace pcap

template <typename Sink>
IngestCounters read_pcap(const std::string& path, Sink&& sink) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open pcap file: " + path);
    uint32_t magic = 0;
    if (!in.read(reinterpret_cast<char*>(&magic), 4)) return {}; // empty file: empty stream
    if (magic == 0x0a0d0d0au) return pcap::read_pcapng(in, path, sink);
    return pcap::read_classic(in, path, magic, sink);
}

inline std::vector<PacketRecord> read_pcap_all(const std::string& path,
                                               IngestCounters* out = nullptr) {
    std::vector<PacketRecord> v;
    auto c = read_pcap(path, [&](const PacketRecord& p) { v.push_back(p); });
    if (out != nullptr) *out = c;
    return v;
}

} // namespace fv
