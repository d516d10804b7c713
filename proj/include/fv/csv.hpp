#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fv/log.hpp"
#include "fv/net.hpp"

namespace fv {

// Input problems that should surface as exit code 2 at the CLI.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IngestCounters {
    uint64_t records = 0;
    uint64_t skipped = 0;       // non-IP or truncated frames (pcap)
    uint64_t proto_warnings = 0; // unknown protocol strings (csv)
};

inline constexpr std::string_view kCsvHeader = "ts,src,dst,sport,dport,proto,flags,len";

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline bool parse_u64(std::string_view s, uint64_t& v) {
    if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        auto r = std::from_chars(s.data() + 2, s.data() + s.size(), v, 16);
        return r.ec == std::errc() && r.ptr == s.data() + s.size();
    }
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

inline bool parse_f64(std::string_view s, double& v) {
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

inline std::string fmt_double(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

} // namespace detail

inline L4Proto parse_proto(std::string_view s, bool& known) {
    known = true;
    if (s == "TCP" || s == "tcp") return L4Proto::TCP;
    if (s == "UDP" || s == "udp") return L4Proto::UDP;
    if (s == "ICMP" || s == "icmp") return L4Proto::ICMP;
    if (s == "OTHER" || s == "other") return L4Proto::OTHER;
    known = false;
    return L4Proto::OTHER;
}

// Reads the canonical trace format (header `ts,src,dst,sport,dport,proto,flags,len`)
// and feeds records to `sink` in file order. Malformed rows abort with the row number.
template <typename Sink>
IngestCounters read_csv(const std::string& path, Sink&& sink) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace file: " + path);
    IngestCounters c;
    std::string line;
    if (!std::getline(in, line)) return c; // empty file: empty stream
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw IoError(path + ": bad csv header, expected `" + std::string(kCsvHeader) + "`");
    uint64_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = detail::split_fields(line);
        auto fail = [&](const char* what) {
            throw IoError(path + ":" + std::to_string(row) + ": " + what);
        };
        if (f.size() != 8) fail("expected 8 fields");
        PacketRecord p;
        uint64_t v = 0;
        if (!detail::parse_f64(f[0], p.timestamp) || p.timestamp < 0) fail("bad timestamp");
        try {
            p.src_addr = IpAddr::parse(std::string(f[1]));
            p.dst_addr = IpAddr::parse(std::string(f[2]));
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
        if (!detail::parse_u64(f[3], v) || v > 65535) fail("bad sport");
        p.src_port = uint16_t(v);
        if (!detail::parse_u64(f[4], v) || v > 65535) fail("bad dport");
        p.dst_port = uint16_t(v);
        bool known = true;
        p.l4_protocol = parse_proto(f[5], known);
        if (!known) {
            ++c.proto_warnings;
            FV_WARN("%s:%llu: unknown protocol `%.*s`, treated as OTHER", path.c_str(),
                    (unsigned long long)row, int(f[5].size()), f[5].data());
        }
        if (!detail::parse_u64(f[6], v) || v > 255) fail("bad flags");
        p.tcp_flags = p.l4_protocol == L4Proto::TCP ? uint8_t(v) : 0;
        if (!detail::parse_u64(f[7], v) || v < 1 || v > 0xffffffffULL) fail("bad length");
        p.length = uint32_t(v);
        ++c.records;
        sink(p);
    }
    return c;
}

inline std::vector<PacketRecord> read_csv_all(const std::string& path, IngestCounters* out = nullptr) {
    std::vector<PacketRecord> v;
    auto c = read_csv(path, [&](const PacketRecord& p) { v.push_back(p); });
    if (out != nullptr) *out = c;
    return v;
}

inline void write_csv_row(std::string& out, const PacketRecord& p) {
    out += detail::fmt_double(p.timestamp);
    out += ',';
    out += p.src_addr.str();
    out += ',';
    out += p.dst_addr.str();
    out += ',';
    out += std::to_string(p.src_port);
    out += ',';
    out += std::to_string(p.dst_port);
    out += ',';
    out += proto_name(p.l4_protocol);
    out += ',';
    char fb[8];
    std::snprintf(fb, sizeof(fb), "0x%02x", p.tcp_flags);
    out += fb;
    out += ',';
    out += std::to_string(p.length);
    out += '\n';
}

inline void write_csv(const std::string& path, const std::vector<PacketRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write trace file: " + path);
    std::string buf;
    buf.reserve(1 << 20);
    buf += kCsvHeader;
    buf += '\n';
    for (const auto& p : records) {
        write_csv_row(buf, p);
        if (buf.size() > (1 << 20)) {
            out.write(buf.data(), std::streamsize(buf.size()));
            buf.clear();
        }
    }
    out.write(buf.data(), std::streamsize(buf.size()));
    if (!out) throw IoError("short write: " + path);
}

// Ground-truth sidecar: one row per flow 4-tuple, label is `benign` or `attack`.
struct GroundTruthRow {
    IpAddr src, dst;
    uint16_t sport = 0, dport = 0;
    std::string label;
};

inline constexpr std::string_view kSidecarHeader = "src,dst,sport,dport,label";

inline void write_sidecar(const std::string& path, const std::vector<GroundTruthRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write sidecar: " + path);
    out << kSidecarHeader << '\n';
    for (const auto& r : rows)
        out << r.src.str() << ',' << r.dst.str() << ',' << r.sport << ',' << r.dport << ','
            << r.label << '\n';
    if (!out) throw IoError("short write: " + path);
}

inline std::vector<GroundTruthRow> read_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sidecar: " + path);
    std::vector<GroundTruthRow> rows;
    std::string line;
    if (!std::getline(in, line)) return rows;
    uint64_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = detail::split_fields(line);
        if (f.size() != 5)
            throw IoError(path + ":" + std::to_string(row) + ": expected 5 fields");
        GroundTruthRow r;
        r.src = IpAddr::parse(std::string(f[0]));
        r.dst = IpAddr::parse(std::string(f[1]));
        uint64_t v = 0;
        if (!detail::parse_u64(f[2], v) || v > 65535)
            throw IoError(path + ":" + std::to_string(row) + ": bad sport");
        r.sport = uint16_t(v);
        if (!detail::parse_u64(f[3], v) || v > 65535)
            throw IoError(path + ":" + std::to_string(row) + ": bad dport");
        r.dport = uint16_t(v);
        r.label = std::string(f[4]);
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace fv
