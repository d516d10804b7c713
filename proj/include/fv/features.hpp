#pragma once

#include <cstdint>
#include <vector>

#include "fv/graph.hpp"
#include "fv/matrix.hpp"

namespace fv {

constexpr size_t kShortStructDim = 8;
constexpr size_t kLongStructDim = 4;
constexpr size_t kShortFullDim = 13;
constexpr size_t kLongFullDim = 11;

namespace detail {

inline void degree_features(const InteractionGraph& g, EdgeRef e, double* out) {
    uint32_t s = g.edge_src(e), d = g.edge_dst(e);
    out[0] = double(g.in_degree(s));
    out[1] = double(g.out_degree(s));
    out[2] = double(g.in_degree(d));
    out[3] = double(g.out_degree(d));
}

} // namespace detail

// Structural feature vector: 8 values for short edges (four same-field flags
// plus endpoint degrees), 4 endpoint degrees for long edges.
inline std::vector<double> edge_struct_features(const InteractionGraph& g, EdgeRef e) {
    if (e.kind == EdgeKind::Long) {
        std::vector<double> f(kLongStructDim);
        detail::degree_features(g, e, f.data());
        return f;
    }
    const ShortEdge& se = g.short_edges[e.index];
    std::vector<double> f(kShortStructDim);
    bool same_src = true, same_sport = true, same_dst = true, same_dport = true;
    const FlowKey& k0 = se.member_tuples.front();
    for (const FlowKey& k : se.member_tuples) {
        same_src &= k.src_addr == k0.src_addr;
        same_sport &= k.src_port == k0.src_port;
        same_dst &= k.dst_addr == k0.dst_addr;
        same_dport &= k.dst_port == k0.dst_port;
    }
    f[0] = same_src ? 1.0 : 0.0;
    f[1] = same_sport ? 1.0 : 0.0;
    f[2] = same_dst ? 1.0 : 0.0;
    f[3] = same_dport ? 1.0 : 0.0;
    detail::degree_features(g, e, f.data() + 4);
    return f;
}

// Full feature vector for detection: structural features followed by the
// statistical group. 13 values for short edges, 11 for long edges.
inline std::vector<double> edge_full_features(const InteractionGraph& g, EdgeRef e) {
    std::vector<double> f = edge_struct_features(g, e);
    if (e.kind == EdgeKind::Short) {
        const ShortEdge& se = g.short_edges[e.index];
        uint64_t len_sum = 0;
        double iv_sum = 0.0;
        for (const auto& pf : se.representative_features) {
            len_sum += pf.length;
            iv_sum += pf.interval;
        }
        f.push_back(double(se.flow_count));
        f.push_back(double(se.representative_features.size()));
        f.push_back(double(len_sum));
        f.push_back(double(se.protocol_mask));
        f.push_back(iv_sum / double(se.representative_features.size()));
    } else {
        const LongEdge& le = g.long_edges[e.index];
        auto [len_code, len_n] = le.len_hist.max_bin();
        auto [proto_code, proto_n] = le.proto_hist.max_bin();
        f.push_back(le.fct);
        f.push_back(le.fct > 0.0 ? double(le.pkt_count) / le.fct : double(le.pkt_count));
        f.push_back(double(le.pkt_count));
        f.push_back(double(len_n));
        f.push_back(double(len_code));
        f.push_back(double(proto_n));
        f.push_back(double(proto_code));
    }
    return f;
}

inline FeatureMatrix feature_rows(const InteractionGraph& g, const std::vector<EdgeRef>& edges,
                                  bool full) {
    if (edges.empty()) return {};
    auto first = full ? edge_full_features(g, edges.front()) : edge_struct_features(g, edges.front());
    FeatureMatrix m(edges.size(), first.size());
    std::copy(first.begin(), first.end(), m.row(0).begin());
    for (size_t i = 1; i < edges.size(); ++i) {
        auto f = full ? edge_full_features(g, edges[i]) : edge_struct_features(g, edges[i]);
        std::copy(f.begin(), f.end(), m.row(i).begin());
    }
    return m;
}

} // namespace fv
