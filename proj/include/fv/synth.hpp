#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "fv/csv.hpp"
#include "fv/net.hpp"
#include "fv/rng.hpp"

namespace fv::synth {

struct Trace {
    std::vector<PacketRecord> packets;
    std::vector<GroundTruthRow> truth;
};

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {
        "benign-web",   "brute-scan", "spoof-flood",     "ssh-crack",
        "lowrate-probe", "botnet-c2",  "obfuscated-crack"};
    return names;
}

namespace detail {

inline IpAddr ip4(uint32_t a, uint32_t b, uint32_t c, uint32_t d) {
    return IpAddr::v4((a << 24) | (b << 16) | (c << 8) | d);
}

struct PacketSpec {
    double dt;         // offset from flow start
    uint32_t len;
    uint8_t flags;
};

class Builder {
public:
    explicit Builder(uint64_t seed) : rng_(seed) {}

    Rng& rng() { return rng_; }

    void flow(const IpAddr& src, const IpAddr& dst, uint16_t sport, uint16_t dport, L4Proto proto,
              double t0, const std::vector<PacketSpec>& pkts, bool attack) {
        for (const auto& ps : pkts) {
            PacketRecord p;
            p.timestamp = round_us(t0 + ps.dt);
            p.src_addr = src;
            p.dst_addr = dst;
            p.src_port = sport;
            p.dst_port = dport;
            p.l4_protocol = proto;
            p.tcp_flags = proto == L4Proto::TCP ? ps.flags : 0;
            p.length = ps.len;
            packets_.push_back(p);
        }
        auto key = std::make_tuple(src, dst, sport, dport);
        auto [it, fresh] = labels_.try_emplace(key, attack);
        if (!fresh && it->second != attack) it->second = true; // attack label wins
    }

    // a TCP exchange with a fixed flag-set (SYN/ACK/PSH/FIN spread over the
    // packets) so every flow built from the same pattern shares one protocol mask
    std::vector<PacketSpec> tcp_pattern(size_t n_pkts, double duration, uint32_t len_lo,
                                        uint32_t len_hi) {
        std::vector<PacketSpec> v(n_pkts);
        for (size_t i = 0; i < n_pkts; ++i) {
            double frac = n_pkts > 1 ? double(i) / double(n_pkts - 1) : 0.0;
            v[i].dt = duration * frac;
            v[i].len = uint32_t(rng_.uniform_int(int64_t(len_lo), int64_t(len_hi)));
            if (i == 0)
                v[i].flags = tcpflag::syn;
            else if (i + 1 == n_pkts)
                v[i].flags = tcpflag::fin | tcpflag::ack;
            else if (i == 1)
                v[i].flags = tcpflag::ack;
            else
                v[i].flags = tcpflag::psh | tcpflag::ack;
        }
        return v;
    }

    std::vector<PacketSpec> udp_pattern(size_t n_pkts, double duration, uint32_t len_lo,
                                        uint32_t len_hi) {
        std::vector<PacketSpec> v(n_pkts);
        for (size_t i = 0; i < n_pkts; ++i) {
            double frac = n_pkts > 1 ? double(i) / double(n_pkts - 1) : 0.0;
            v[i].dt = duration * frac;
            v[i].len = uint32_t(rng_.uniform_int(int64_t(len_lo), int64_t(len_hi)));
            v[i].flags = 0;
        }
        return v;
    }

    Trace finish() {
        Trace t;
        std::sort(packets_.begin(), packets_.end(), [](const PacketRecord& a, const PacketRecord& b) {
            if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
            if (auto c = a.src_addr <=> b.src_addr; c != 0) return c < 0;
            if (auto c = a.dst_addr <=> b.dst_addr; c != 0) return c < 0;
            if (a.src_port != b.src_port) return a.src_port < b.src_port;
            if (a.dst_port != b.dst_port) return a.dst_port < b.dst_port;
            return a.length < b.length;
        });
        t.packets = std::move(packets_);
        for (const auto& [key, attack] : labels_) {
            GroundTruthRow r;
            std::tie(r.src, r.dst, r.sport, r.dport) = key;
            r.label = attack ? "attack" : "benign";
            t.truth.push_back(std::move(r));
        }
        return t;
    }

private:
    static double round_us(double t) { return std::floor(t * 1e6 + 0.5) / 1e6; }

    Rng rng_;
    std::vector<PacketRecord> packets_;
    std::map<std::tuple<IpAddr, IpAddr, uint16_t, uint16_t>, bool> labels_;
};

// Web-style background: long-tail client/server pairs, a few popular servers,
// peer-to-peer long flows. Spread over [0.5, 43] so a 45 s window holds it.
inline void benign_background(Builder& b) {
    Rng& rng = b.rng();
    uint16_t sport = 20000;
    auto session = [&](const IpAddr& client, const IpAddr& server, uint16_t dport) {
        size_t flows = size_t(rng.uniform_int(1, 4));
        double t0 = rng.uniform_real(0.5, 38.0);
        for (size_t f = 0; f < flows; ++f) {
            double ts = t0 + rng.uniform_real(0.0, 3.0);
            size_t n = size_t(rng.uniform_int(3, 9));
            double dur = rng.uniform_real(0.05, 1.5);
            b.flow(client, server, sport, dport, L4Proto::TCP, ts,
                   b.tcp_pattern(n, dur, 60, 320), false);
            b.flow(server, client, dport, sport, L4Proto::TCP, ts + 0.002,
                   b.tcp_pattern(n + 1, dur, 60, 1400), false);
            ++sport;
        }
        // some sessions carry one long download
        if (rng.chance(0.12)) {
            double ts = t0 + rng.uniform_real(0.0, 2.0);
            size_t n = size_t(rng.uniform_int(18, 60));
            double dur = rng.uniform_real(0.8, 3.0);
            b.flow(server, client, dport, sport, L4Proto::TCP, ts,
                   b.tcp_pattern(n, dur, 900, 1500), false);
            b.flow(client, server, sport, dport, L4Proto::TCP, ts + 0.001,
                   b.tcp_pattern(std::max<size_t>(4, n / 4), dur, 60, 120), false);
            ++sport;
        }
    };

    // long tail: one or two clients per small server
    for (uint32_t i = 0; i < 200; ++i) {
        IpAddr server = ip4(172, 16, i / 200, 10 + i % 200);
        size_t clients = size_t(rng.uniform_int(1, 2));
        for (size_t c = 0; c < clients; ++c) {
            IpAddr client = ip4(10, 1, i % 250, uint32_t(rng.uniform_int(2, 250)));
            session(client, server, rng.chance(0.5) ? 443 : 80);
        }
    }
    // popular servers with larger fan-in
    for (uint32_t i = 0; i < 8; ++i) {
        IpAddr server = ip4(172, 16, 10, 10 + i);
        size_t clients = size_t(rng.uniform_int(24, 40));
        for (size_t c = 0; c < clients; ++c) {
            IpAddr client = ip4(10, 3, i, uint32_t(2 + c));
            session(client, server, 443);
        }
    }
    // peer-to-peer long flows
    for (uint32_t i = 0; i < 60; ++i) {
        IpAddr a = ip4(10, 2, i, 2), peer = ip4(10, 2, i, 3);
        double ts = rng.uniform_real(1.0, 20.0);
        size_t n = size_t(rng.uniform_int(20, 80));
        double dur = rng.uniform_real(5.0, 22.0);
        uint16_t port = uint16_t(rng.uniform_int(5000, 9000));
        b.flow(a, peer, port, port, L4Proto::UDP, ts, b.udp_pattern(n, dur, 120, 320), false);
        b.flow(peer, a, port, port, L4Proto::UDP, ts + 0.005,
               b.udp_pattern(std::max<size_t>(16, n - 4), dur, 120, 320), false);
    }
}

// repeated password attempts from one source against many servers on port 22
inline void overlay_crack(Builder& b, bool inject_benign) {
    Rng& rng = b.rng();
    IpAddr atk = ip4(198, 51, 100, 7);
    double burst0 = 14.0 + rng.uniform_real(0.0, 1.0);
    uint16_t sport = 42000;
    size_t victims = 360 + size_t(rng.uniform_int(0, 40));
    for (size_t v = 0; v < victims; ++v) {
        IpAddr vic = ip4(203, 0, uint32_t(113 + v / 250), uint32_t(2 + v % 250));
        size_t attempts = size_t(rng.uniform_int(4, 7));
        for (size_t aidx = 0; aidx < attempts; ++aidx) {
            double t0 = burst0 + rng.uniform_real(0.0, 6.0);
            double dur = rng.uniform_real(0.2, 0.9);
            size_t n = size_t(rng.uniform_int(5, 7));
            b.flow(atk, vic, sport, 22, L4Proto::TCP, t0, b.tcp_pattern(n, dur, 60, 180), true);
            if (rng.chance(0.8)) {
                b.flow(vic, atk, 22, sport, L4Proto::TCP, t0 + 0.003,
                       b.tcp_pattern(std::max<size_t>(4, n - 1), dur, 60, 120), true);
            }
            ++sport;
        }
    }
    if (!inject_benign) return;
    // obfuscation: the attacker mixes benign-looking traffic into the attack
    // window (TLS-like sessions, UDP streaming, pings)
    for (size_t i = 0; i < 260; ++i) {
        IpAddr srv = ip4(203, 0, 140, uint32_t(2 + i % 35));
        double t0 = burst0 - 2.0 + rng.uniform_real(0.0, 10.0);
        double dur = rng.uniform_real(0.3, 1.2);
        size_t n = size_t(rng.uniform_int(10, 14));
        b.flow(atk, srv, sport, 443, L4Proto::TCP, t0, b.tcp_pattern(n, dur, 60, 700), false);
        b.flow(srv, atk, 443, sport, L4Proto::TCP, t0 + 0.004,
               b.tcp_pattern(n - 2, dur, 60, 1200), false);
        ++sport;
    }
    for (size_t i = 0; i < 180; ++i) {
        IpAddr srv = ip4(203, 0, 141, uint32_t(2 + i % 20));
        double t0 = 10.0 + rng.uniform_real(0.0, 20.0);
        b.flow(atk, srv, sport, 443, L4Proto::UDP, t0,
               b.udp_pattern(size_t(rng.uniform_int(12, 15)), rng.uniform_real(0.5, 2.0), 200, 1200),
               false);
        ++sport;
    }
    for (size_t i = 0; i < 90; ++i) {
        IpAddr dst = ip4(203, 0, 142, uint32_t(2 + i));
        double t0 = 10.0 + rng.uniform_real(0.0, 20.0);
        b.flow(atk, dst, 0, 0, L4Proto::ICMP, t0, b.udp_pattern(2, 0.5, 64, 64), false);
    }
}

// one source SYN-scanning a /18-sized target space on port 23
inline void overlay_scan(Builder& b) {
    Rng& rng = b.rng();
    IpAddr atk = ip4(198, 51, 100, 7);
    double burst0 = 10.0 + rng.uniform_real(0.0, 1.0);
    size_t targets = 6200 + size_t(rng.uniform_int(0, 600));
    for (size_t v = 0; v < targets; ++v) {
        IpAddr vic = ip4(203, 0, uint32_t(16 + v / 250), uint32_t(2 + v % 250));
        double t0 = burst0 + rng.uniform_real(0.0, 5.5);
        b.flow(atk, vic, uint16_t(20000 + v), 23, L4Proto::TCP, t0,
               {{0.0, 60, tcpflag::syn}}, true);
        if (rng.chance(0.28)) {
            b.flow(vic, atk, 23, uint16_t(20000 + v), L4Proto::TCP, t0 + 0.002,
                   {{0.0, 60, uint8_t(tcpflag::rst | tcpflag::ack)}}, true);
        }
    }
}

// spoofed-source SYN flood against one service
inline void overlay_spoof(Builder& b) {
    Rng& rng = b.rng();
    IpAddr vic = ip4(203, 0, 200, 10);
    double burst0 = 18.0 + rng.uniform_real(0.0, 1.0);
    size_t sources = 8500 + size_t(rng.uniform_int(0, 1000));
    for (size_t i = 0; i < sources; ++i) {
        IpAddr spoof = ip4(185, uint32_t(rng.uniform_int(0, 255)), uint32_t(rng.uniform_int(0, 255)),
                           uint32_t(rng.uniform_int(1, 254)));
        double t0 = burst0 + rng.uniform_real(0.0, 4.0);
        size_t n = rng.chance(0.3) ? 2 : 1;
        std::vector<PacketSpec> p(n, {0.0, 60, tcpflag::syn});
        if (n == 2) p[1].dt = rng.uniform_real(0.05, 0.4);
        b.flow(spoof, vic, 33333, 443, L4Proto::TCP, t0, p, true);
        if (rng.chance(0.25)) {
            b.flow(vic, spoof, 443, 33333, L4Proto::TCP, t0 + 0.001,
                   {{0.0, 60, uint8_t(tcpflag::syn | tcpflag::ack)},
                    {0.3, 60, uint8_t(tcpflag::rst | tcpflag::ack)}},
                   true);
        }
    }
}

// wide, slower UDP probing; a fraction of targets answer with ICMP errors
inline void overlay_probe(Builder& b) {
    Rng& rng = b.rng();
    IpAddr atk = ip4(198, 51, 100, 7);
    double burst0 = 4.0 + rng.uniform_real(0.0, 1.0);
    size_t targets = 20000 + size_t(rng.uniform_int(0, 2000));
    for (size_t v = 0; v < targets; ++v) {
        IpAddr vic = ip4(203, 0, uint32_t(80 + v / 250), uint32_t(2 + v % 250));
        double t0 = burst0 + rng.uniform_real(0.0, 16.0);
        b.flow(atk, vic, uint16_t(20000 + v % 40000), 123, L4Proto::UDP, t0,
               {{0.0, uint32_t(rng.uniform_int(52, 68)), 0}}, true);
        if (rng.chance(0.2)) {
            b.flow(vic, atk, 0, 0, L4Proto::ICMP, t0 + 0.004, {{0.0, 56, 0}}, true);
        }
    }
}

// many bots synchronizing against one command server in a short burst
inline void overlay_c2(Builder& b) {
    Rng& rng = b.rng();
    IpAddr c2 = ip4(203, 0, 150, 5);
    double burst0 = 25.0 + rng.uniform_real(0.0, 1.0);
    size_t bots = 130 + size_t(rng.uniform_int(0, 20));
    for (size_t bot = 0; bot < bots; ++bot) {
        IpAddr src = ip4(198, 18, uint32_t(bot / 200), uint32_t(2 + bot % 200));
        size_t flows = size_t(rng.uniform_int(16, 24));
        for (size_t f = 0; f < flows; ++f) {
            double t0 = burst0 + rng.uniform_real(0.0, 6.0);
            double dur = rng.uniform_real(0.1, 0.5);
            size_t n = size_t(rng.uniform_int(4, 7));
            b.flow(src, c2, uint16_t(30000 + f), 8443, L4Proto::TCP, t0,
                   b.tcp_pattern(n, dur, 60, 900), true);
            b.flow(c2, src, 8443, uint16_t(30000 + f), L4Proto::TCP, t0 + 0.003,
                   b.tcp_pattern(std::max<size_t>(4, n - 1), dur, 60, 600), true);
        }
    }
}

} // namespace detail

// Deterministic trace for (scenario, seed): a benign background plus the
// scenario's labeled attack overlay, with a flow-level ground-truth sidecar.
inline Trace gen_synthetic(const std::string& scenario, uint64_t seed) {
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), scenario) == names.end())
        throw std::invalid_argument("unknown scenario: " + scenario);
    detail::Builder b(hash_mix(seed ^ 0x6a09e667f3bcc908ULL));
    detail::benign_background(b);
    if (scenario == "brute-scan") detail::overlay_scan(b);
    else if (scenario == "spoof-flood") detail::overlay_spoof(b);
    else if (scenario == "ssh-crack") detail::overlay_crack(b, false);
    else if (scenario == "lowrate-probe") detail::overlay_probe(b);
    else if (scenario == "botnet-c2") detail::overlay_c2(b);
    else if (scenario == "obfuscated-crack") detail::overlay_crack(b, true);
    return b.finish();
}

} // namespace fv::synth
