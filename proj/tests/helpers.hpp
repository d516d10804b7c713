#pragma once

// Shared test oracles. Everything here is intentionally naive and independent
// of the library's implementation path.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "fv/dbscan.hpp"
#include "fv/flow.hpp"
#include "fv/matrix.hpp"
#include "fv/net.hpp"
#include "fv/rng.hpp"

namespace testutil {

// ---- naive O(n^2) DBSCAN with the same canonical semantics -----------------

inline std::vector<int64_t> naive_dbscan(const fv::FeatureMatrix& m, const fv::DbscanParams& p) {
    size_t n = m.rows;
    std::vector<int64_t> labels(n, fv::kNoise);
    if (n == 0) return labels;
    std::vector<std::vector<uint32_t>> nbrs(n);
    std::vector<bool> core(n, false);
    double eps_sq = p.eps * p.eps;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j)
            if (fv::sq_distance(m.row(i), m.row(j)) <= eps_sq) nbrs[i].push_back(uint32_t(j));
        core[i] = nbrs[i].size() >= p.min_points;
    }
    int64_t next = 0;
    for (size_t seed = 0; seed < n; ++seed) {
        if (!core[seed] || labels[seed] != fv::kNoise) continue;
        int64_t cid = next++;
        std::deque<size_t> q{seed};
        labels[seed] = cid;
        while (!q.empty()) {
            size_t u = q.front();
            q.pop_front();
            for (uint32_t v : nbrs[u])
                if (core[v] && labels[v] == fv::kNoise) {
                    labels[v] = cid;
                    q.push_back(v);
                }
        }
    }
    for (size_t i = 0; i < n; ++i) {
        if (core[i] || labels[i] != fv::kNoise) continue;
        int64_t best = fv::kNoise;
        for (uint32_t v : nbrs[i])
            if (core[v] && (best == fv::kNoise || labels[v] < best)) best = labels[v];
        labels[i] = best;
    }
    return labels;
}

// relabels cluster ids by first appearance so label vectors compare up to renaming
inline std::vector<int64_t> canonical_labels(const std::vector<int64_t>& in) {
    std::map<int64_t, int64_t> remap;
    std::vector<int64_t> out(in.size(), fv::kNoise);
    int64_t next = 0;
    for (size_t i = 0; i < in.size(); ++i) {
        if (in[i] < 0) continue;
        auto [it, fresh] = remap.try_emplace(in[i], next);
        if (fresh) ++next;
        out[i] = it->second;
    }
    return out;
}

// ---- literal replay of the flow classification algorithm -------------------

struct RefFlow {
    fv::FlowKey key;
    std::vector<double> ts;
    std::vector<uint32_t> len;
    std::vector<uint16_t> mask;
    bool is_long = false;
};

inline std::vector<RefFlow> reference_classify(const std::vector<fv::PacketRecord>& packets,
                                               const fv::FlowTableConfig& cfg) {
    std::vector<fv::PacketRecord> sorted = packets;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    std::map<fv::FlowKey, RefFlow> table;
    std::vector<RefFlow> done;
    double time_now = 0.0, last_check = 0.0;
    bool first = true;
    auto evict = [&](double now) {
        for (auto it = table.begin(); it != table.end();) {
            if (now - it->second.ts.back() > cfg.pkt_timeout) {
                done.push_back(it->second);
                it = table.erase(it);
            } else {
                ++it;
            }
        }
    };
    for (const auto& p : sorted) {
        if (first) {
            time_now = last_check = p.timestamp;
            first = false;
        }
        fv::FlowKey k{p.src_addr, p.dst_addr, p.src_port, p.dst_port};
        RefFlow& f = table[k];
        f.key = k;
        f.ts.push_back(p.timestamp);
        f.len.push_back(p.length);
        f.mask.push_back(fv::protocol_mask_of(p.l4_protocol, p.tcp_flags));
        if (time_now - last_check > cfg.judge_interval) {
            evict(time_now);
            last_check = time_now;
        }
        time_now = p.timestamp;
    }
    for (auto& [k, f] : table) done.push_back(f);
    for (auto& f : done) f.is_long = f.ts.size() > cfg.flow_line;
    return done;
}

// comparable fingerprint of a classified flow
inline std::string flow_fingerprint(const fv::FlowKey& key, const std::vector<double>& ts,
                                    bool is_long) {
    std::string s = key.src_addr.str() + ">" + key.dst_addr.str() + ":" +
                    std::to_string(key.src_port) + ">" + std::to_string(key.dst_port) +
                    (is_long ? "|L" : "|S");
    char buf[32];
    for (double t : ts) {
        std::snprintf(buf, sizeof(buf), "|%.9f", t);
        s += buf;
    }
    return s;
}

// ---- brute force minimum vertex cover --------------------------------------

inline uint32_t brute_min_cover(size_t n, const std::vector<std::pair<uint32_t, uint32_t>>& edges) {
    uint32_t best = uint32_t(n);
    for (uint64_t mask = 0; mask < (uint64_t(1) << n); ++mask) {
        bool ok = true;
        for (auto [a, b] : edges)
            if (!((mask >> a) & 1) && !((mask >> b) & 1)) {
                ok = false;
                break;
            }
        if (ok) best = std::min(best, uint32_t(__builtin_popcountll(mask)));
    }
    return best;
}

inline bool covers_all(const std::vector<uint32_t>& cover,
                       const std::vector<std::pair<uint32_t, uint32_t>>& edges) {
    std::vector<bool> in(1 + [&] {
                             uint32_t mx = 0;
                             for (auto [a, b] : edges) mx = std::max({mx, a, b});
                             return mx;
                         }(),
                         false);
    for (uint32_t v : cover) in[v] = true;
    for (auto [a, b] : edges)
        if (!in[a] && !in[b]) return false;
    return true;
}

// ---- minimal classic pcap writer for fixtures -------------------------------

inline void write_classic_pcap(const std::string& path,
                               const std::vector<fv::PacketRecord>& packets) {
    std::ofstream out(path, std::ios::binary);
    auto u32 = [&](uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto u16 = [&](uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };
    u32(0xa1b2c3d4);
    u16(2);
    u16(4);
    u32(0);
    u32(0);
    u32(65535);
    u32(101); // raw IP link type keeps the writer independent of MAC details
    for (const auto& p : packets) {
        std::vector<uint8_t> ip;
        if (!p.src_addr.v6) {
            size_t l4 = p.l4_protocol == fv::L4Proto::TCP   ? 20
                        : p.l4_protocol == fv::L4Proto::UDP ? 8
                                                            : 8;
            ip.assign(20 + l4, 0);
            ip[0] = 0x45;
            uint16_t total = uint16_t(p.length);
            ip[2] = uint8_t(total >> 8);
            ip[3] = uint8_t(total);
            ip[8] = 64;
            ip[9] = p.l4_protocol == fv::L4Proto::TCP   ? 6
                    : p.l4_protocol == fv::L4Proto::UDP ? 17
                    : p.l4_protocol == fv::L4Proto::ICMP ? 1
                                                         : 47;
            std::memcpy(ip.data() + 12, p.src_addr.bytes.data(), 4);
            std::memcpy(ip.data() + 16, p.dst_addr.bytes.data(), 4);
            if (p.l4_protocol == fv::L4Proto::TCP || p.l4_protocol == fv::L4Proto::UDP) {
                ip[20] = uint8_t(p.src_port >> 8);
                ip[21] = uint8_t(p.src_port);
                ip[22] = uint8_t(p.dst_port >> 8);
                ip[23] = uint8_t(p.dst_port);
            }
            if (p.l4_protocol == fv::L4Proto::TCP) {
                ip[32] = 0x50; // data offset 5 words
                ip[33] = p.tcp_flags;
            }
        } else {
            ip.assign(40 + 20, 0);
            ip[0] = 0x60;
            uint16_t payload = uint16_t(p.length - 40);
            ip[4] = uint8_t(payload >> 8);
            ip[5] = uint8_t(payload);
            ip[6] = p.l4_protocol == fv::L4Proto::TCP   ? 6
                    : p.l4_protocol == fv::L4Proto::UDP ? 17
                    : p.l4_protocol == fv::L4Proto::ICMP ? 58
                                                         : 47;
            std::memcpy(ip.data() + 8, p.src_addr.bytes.data(), 16);
            std::memcpy(ip.data() + 24, p.dst_addr.bytes.data(), 16);
            if (p.l4_protocol == fv::L4Proto::TCP || p.l4_protocol == fv::L4Proto::UDP) {
                ip[40] = uint8_t(p.src_port >> 8);
                ip[41] = uint8_t(p.src_port);
                ip[42] = uint8_t(p.dst_port >> 8);
                ip[43] = uint8_t(p.dst_port);
            }
            if (p.l4_protocol == fv::L4Proto::TCP) {
                ip[52] = 0x50;
                ip[53] = p.tcp_flags;
            }
        }
        uint32_t sec = uint32_t(p.timestamp);
        uint32_t usec = uint32_t((p.timestamp - double(sec)) * 1e6 + 0.5);
        if (usec >= 1000000) {
            ++sec;
            usec -= 1000000;
        }
        u32(sec);
        u32(usec);
        u32(uint32_t(ip.size()));
        u32(uint32_t(ip.size()));
        out.write(reinterpret_cast<const char*>(ip.data()), std::streamsize(ip.size()));
    }
}

// ---- evaluation metrics ------------------------------------------------------

// Mann-Whitney AUC with midrank tie handling
inline double auc_score(const std::vector<double>& scores, const std::vector<bool>& positive) {
    std::vector<size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), size_t(0));
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });
    double pos_rank_sum = 0.0;
    size_t n_pos = 0, n_neg = 0;
    for (size_t i = 0; i < idx.size();) {
        size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
        double midrank = (double(i) + double(j - 1)) / 2.0 + 1.0;
        for (size_t k = i; k < j; ++k)
            if (positive[idx[k]]) pos_rank_sum += midrank;
        i = j;
    }
    for (bool b : positive) (b ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0) return 1.0;
    return (pos_rank_sum - double(n_pos) * (double(n_pos) + 1.0) / 2.0) /
           (double(n_pos) * double(n_neg));
}

struct F1 {
    uint64_t tp = 0, fp = 0, fn = 0;
    double precision() const { return tp + fp == 0 ? 1.0 : double(tp) / double(tp + fp); }
    double recall() const { return tp + fn == 0 ? 1.0 : double(tp) / double(tp + fn); }
    double f1() const {
        double p = precision(), r = recall();
        return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    }
};

// ---- misc --------------------------------------------------------------------

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline fv::IpAddr ip(const std::string& s) { return fv::IpAddr::parse(s); }

} // namespace testutil
