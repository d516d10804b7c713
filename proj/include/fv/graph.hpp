#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fv/flow.hpp"
#include "fv/net.hpp"

namespace fv {

// Sparse fixed-width histogram; absent buckets have count zero.
struct Histogram {
    double bucket_width = 1.0;
    std::map<int64_t, uint64_t> bins;

    void add(int64_t code) { ++bins[code]; }

    uint64_t total() const {
        uint64_t t = 0;
        for (const auto& [code, n] : bins) t += n;
        return t;
    }

    // bucket with the largest count; ties resolved toward the lowest code
    std::pair<int64_t, uint64_t> max_bin() const {
        std::pair<int64_t, uint64_t> best{0, 0};
        for (const auto& [code, n] : bins)
            if (n > best.second) best = {code, n};
        return best;
    }

    bool operator==(const Histogram&) const = default;
};

constexpr double kLenBucketWidth = 10.0;    // bytes
constexpr double kIntervalBucketWidth = 1e-3; // seconds
constexpr int64_t kMaxIntervalCode = int64_t(0x7fffffff);

enum class VertexKind : uint8_t { Single, Group };

struct Vertex {
    VertexKind kind = VertexKind::Single;
    std::vector<IpAddr> addrs; // sorted; size 1 for Single, >= 2 for Group

    // compact printable identity
    std::string label() const {
        if (kind == VertexKind::Single) return addrs.front().str();
        return "grp" + std::to_string(addrs.size()) + ":" + addrs.front().str() + ".." +
               addrs.back().str();
    }

    bool operator==(const Vertex&) const = default;
};

enum class AggKind : uint8_t { SrcAgg, DstAgg, BothAgg, NoAgg };

inline const char* agg_name(AggKind k) {
    switch (k) {
        case AggKind::SrcAgg: return "src";
        case AggKind::DstAgg: return "dst";
        case AggKind::BothAgg: return "both";
        default: return "none";
    }
}

struct ShortEdge {
    AggKind agg_kind = AggKind::NoAgg;
    std::vector<PerPacketFeature> representative_features;
    std::vector<FlowKey> member_tuples;
    uint64_t flow_count = 1;
    double first_ts = 0.0;
    double last_ts = 0.0;
    uint16_t protocol_mask = 0;
    uint32_t src_vertex = 0;
    uint32_t dst_vertex = 0;
};

struct LongEdge {
    FlowKey key;
    Histogram len_hist{kLenBucketWidth, {}};
    Histogram interval_hist{kIntervalBucketWidth, {}};
    Histogram proto_hist{1.0, {}};
    double fct = 0.0;
    uint64_t pkt_count = 0;
    double first_ts = 0.0;
    double last_ts = 0.0;
    uint32_t src_vertex = 0;
    uint32_t dst_vertex = 0;
};

enum class EdgeKind : uint8_t { Short, Long };

struct EdgeRef {
    EdgeKind kind = EdgeKind::Short;
    uint32_t index = 0;

    auto operator<=>(const EdgeRef&) const = default;
};

// In-memory flow interaction graph for one analysis window.
struct InteractionGraph {
    std::vector<Vertex> vertices;
    std::vector<ShortEdge> short_edges;
    std::vector<LongEdge> long_edges;

    // adjacency index, one entry per vertex
    std::vector<std::vector<EdgeRef>> out_edges;
    std::vector<std::vector<EdgeRef>> in_edges;

    size_t out_degree(uint32_t v) const { return out_edges[v].size(); }
    size_t in_degree(uint32_t v) const { return in_edges[v].size(); }

    const ShortEdge& short_edge(uint32_t i) const { return short_edges[i]; }
    const LongEdge& long_edge(uint32_t i) const { return long_edges[i]; }

    uint32_t edge_src(EdgeRef e) const {
        return e.kind == EdgeKind::Short ? short_edges[e.index].src_vertex
                                         : long_edges[e.index].src_vertex;
    }
    uint32_t edge_dst(EdgeRef e) const {
        return e.kind == EdgeKind::Short ? short_edges[e.index].dst_vertex
                                         : long_edges[e.index].dst_vertex;
    }
    double edge_first_ts(EdgeRef e) const {
        return e.kind == EdgeKind::Short ? short_edges[e.index].first_ts
                                         : long_edges[e.index].first_ts;
    }
    double edge_last_ts(EdgeRef e) const {
        return e.kind == EdgeKind::Short ? short_edges[e.index].last_ts
                                         : long_edges[e.index].last_ts;
    }
    // number of flows the edge stands for
    uint64_t edge_flows(EdgeRef e) const {
        return e.kind == EdgeKind::Short ? short_edges[e.index].flow_count : 1;
    }
};

// Aggregates completed short flows into edges. Flows are first partitioned by
// their flow-level protocol mask; groups above agg_line collapse by shared
// source first, then by shared destination; everything left is one edge per
// flow.
inline std::vector<ShortEdge> aggregate_short(const std::vector<FlowRecord>& flows,
                                              uint32_t agg_line) {
    std::vector<ShortEdge> edges;
    std::map<uint16_t, std::vector<size_t>> by_mask;
    for (size_t i = 0; i < flows.size(); ++i) by_mask[flows[i].flow_mask()].push_back(i);

    auto build_edge = [&](const std::vector<size_t>& members, AggKind kind, uint16_t mask) {
        ShortEdge e;
        e.agg_kind = kind;
        e.protocol_mask = mask;
        e.flow_count = members.size();
        const FlowRecord& rep = flows[members.front()];
        e.representative_features = rep.features;
        e.first_ts = rep.first_ts;
        e.last_ts = rep.last_ts;
        e.member_tuples.reserve(members.size());
        for (size_t i : members) {
            e.member_tuples.push_back(flows[i].key);
            e.first_ts = std::min(e.first_ts, flows[i].first_ts);
            e.last_ts = std::max(e.last_ts, flows[i].last_ts);
        }
        edges.push_back(std::move(e));
    };

    for (const auto& [mask, idxs] : by_mask) {
        std::vector<size_t> remaining;
        // pass 1: same source address
        std::map<IpAddr, std::vector<size_t>> by_src;
        for (size_t i : idxs) by_src[flows[i].key.src_addr].push_back(i);
        for (const auto& [src, group] : by_src) {
            if (group.size() > agg_line) {
                bool unique_dst = true;
                for (size_t i : group)
                    if (flows[i].key.dst_addr != flows[group.front()].key.dst_addr) {
                        unique_dst = false;
                        break;
                    }
                build_edge(group, unique_dst ? AggKind::BothAgg : AggKind::SrcAgg, mask);
            } else {
                remaining.insert(remaining.end(), group.begin(), group.end());
            }
        }
        // pass 2: same destination address over the leftovers
        std::map<IpAddr, std::vector<size_t>> by_dst;
        for (size_t i : remaining) by_dst[flows[i].key.dst_addr].push_back(i);
        for (const auto& [dst, group] : by_dst) {
            if (group.size() > agg_line) {
                build_edge(group, AggKind::DstAgg, mask);
            } else {
                for (size_t i : group) build_edge({i}, AggKind::NoAgg, mask);
            }
        }
    }
    return edges;
}

inline int64_t length_code(uint32_t length) { return int64_t(length / 10); }

inline int64_t interval_code(double interval) {
    double c = std::floor(interval / kIntervalBucketWidth);
    if (c < 0) return 0;
    if (c > double(kMaxIntervalCode)) return kMaxIntervalCode;
    return int64_t(c);
}

// Fits the per-packet feature distributions of one long flow.
inline LongEdge fit_long(const FlowRecord& flow) {
    LongEdge e;
    e.key = flow.key;
    e.first_ts = flow.first_ts;
    e.last_ts = flow.last_ts;
    e.fct = flow.last_ts - flow.first_ts;
    e.pkt_count = flow.features.size();
    for (const auto& f : flow.features) {
        e.len_hist.add(length_code(f.length));
        e.interval_hist.add(interval_code(f.interval));
        e.proto_hist.add(int64_t(f.protocol_mask));
    }
    return e;
}

namespace detail {

struct VertexIdentity {
    VertexKind kind;
    std::vector<IpAddr> addrs;

    auto operator<=>(const VertexIdentity&) const = default;
};

class VertexInterner {
public:
    explicit VertexInterner(InteractionGraph& g) : g_(g) {}

    uint32_t single(const IpAddr& a) { return intern({VertexKind::Single, {a}}); }

    // identity of a group vertex is its sorted distinct member set
    uint32_t group(std::vector<IpAddr> addrs) {
        std::sort(addrs.begin(), addrs.end());
        addrs.erase(std::unique(addrs.begin(), addrs.end()), addrs.end());
        if (addrs.size() == 1) return single(addrs.front());
        return intern({VertexKind::Group, std::move(addrs)});
    }

private:
    uint32_t intern(VertexIdentity id) {
        auto it = ids_.find(id);
        if (it != ids_.end()) return it->second;
        uint32_t v = uint32_t(g_.vertices.size());
        g_.vertices.push_back(Vertex{id.kind, id.addrs});
        g_.out_edges.emplace_back();
        g_.in_edges.emplace_back();
        ids_.emplace(std::move(id), v);
        return v;
    }

    InteractionGraph& g_;
    std::map<VertexIdentity, uint32_t> ids_;
};

} // namespace detail

// Materializes edges into the graph: vertices are created or merged by address
// identity and the adjacency index is updated.
inline void add_edges(InteractionGraph& g, std::vector<ShortEdge> short_edges,
                      std::vector<LongEdge> long_edges) {
    detail::VertexInterner intern(g);
    // rebuild the interner state from vertices already present
    if (!g.vertices.empty()) {
        throw std::logic_error("add_edges expects an empty graph per window");
    }
    for (auto& e : short_edges) {
        std::vector<IpAddr> srcs, dsts;
        for (const auto& t : e.member_tuples) {
            srcs.push_back(t.src_addr);
            dsts.push_back(t.dst_addr);
        }
        e.src_vertex = e.agg_kind == AggKind::DstAgg ? intern.group(srcs) : intern.single(srcs.front());
        e.dst_vertex = e.agg_kind == AggKind::SrcAgg ? intern.group(dsts) : intern.single(dsts.front());
        uint32_t idx = uint32_t(g.short_edges.size());
        g.short_edges.push_back(std::move(e));
        g.out_edges[g.short_edges[idx].src_vertex].push_back({EdgeKind::Short, idx});
        g.in_edges[g.short_edges[idx].dst_vertex].push_back({EdgeKind::Short, idx});
    }
    for (auto& e : long_edges) {
        e.src_vertex = intern.single(e.key.src_addr);
        e.dst_vertex = intern.single(e.key.dst_addr);
        uint32_t idx = uint32_t(g.long_edges.size());
        g.long_edges.push_back(std::move(e));
        g.out_edges[g.long_edges[idx].src_vertex].push_back({EdgeKind::Long, idx});
        g.in_edges[g.long_edges[idx].dst_vertex].push_back({EdgeKind::Long, idx});
    }
}

// Convenience: classified flows in, complete per-window graph out.
inline InteractionGraph build_graph(const std::vector<FlowRecord>& short_flows,
                                    const std::vector<FlowRecord>& long_flows,
                                    uint32_t agg_line) {
    InteractionGraph g;
    std::vector<LongEdge> longs;
    longs.reserve(long_flows.size());
    for (const auto& f : long_flows) longs.push_back(fit_long(f));
    add_edges(g, aggregate_short(short_flows, agg_line), std::move(longs));
    return g;
}

inline bool graph_equal(const InteractionGraph& a, const InteractionGraph& b) {
    if (a.vertices != b.vertices) return false;
    auto short_eq = [](const ShortEdge& x, const ShortEdge& y) {
        return x.agg_kind == y.agg_kind && x.representative_features == y.representative_features &&
               x.member_tuples == y.member_tuples && x.flow_count == y.flow_count &&
               x.first_ts == y.first_ts && x.last_ts == y.last_ts &&
               x.protocol_mask == y.protocol_mask && x.src_vertex == y.src_vertex &&
               x.dst_vertex == y.dst_vertex;
    };
    auto long_eq = [](const LongEdge& x, const LongEdge& y) {
        return x.key == y.key && x.len_hist == y.len_hist && x.interval_hist == y.interval_hist &&
               x.proto_hist == y.proto_hist && x.fct == y.fct && x.pkt_count == y.pkt_count &&
               x.first_ts == y.first_ts && x.last_ts == y.last_ts && x.src_vertex == y.src_vertex &&
               x.dst_vertex == y.dst_vertex;
    };
    return std::equal(a.short_edges.begin(), a.short_edges.end(), b.short_edges.begin(),
                      b.short_edges.end(), short_eq) &&
           std::equal(a.long_edges.begin(), a.long_edges.end(), b.long_edges.begin(),
                      b.long_edges.end(), long_eq);
}

} // namespace fv
