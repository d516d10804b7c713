#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fv/dbscan.hpp"
#include "fv/graph.hpp"
#include "fv/matrix.hpp"

namespace fv {

struct Component {
    std::vector<uint32_t> vertex_ids;
    std::vector<uint32_t> short_edge_ids;
    std::vector<uint32_t> long_edge_ids;
};

// Maximal connected components of the graph viewed as undirected; every edge
// lands in exactly one component.
inline std::vector<Component> components(const InteractionGraph& g) {
    std::vector<Component> out;
    std::vector<int32_t> comp_of(g.vertices.size(), -1);
    std::vector<uint32_t> stack;
    for (uint32_t start = 0; start < g.vertices.size(); ++start) {
        if (comp_of[start] >= 0) continue;
        int32_t cid = int32_t(out.size());
        out.emplace_back();
        stack.push_back(start);
        comp_of[start] = cid;
        while (!stack.empty()) {
            uint32_t v = stack.back();
            stack.pop_back();
            out[size_t(cid)].vertex_ids.push_back(v);
            auto visit = [&](uint32_t u) {
                if (comp_of[u] < 0) {
                    comp_of[u] = cid;
                    stack.push_back(u);
                }
            };
            for (EdgeRef e : g.out_edges[v]) visit(g.edge_dst(e));
            for (EdgeRef e : g.in_edges[v]) visit(g.edge_src(e));
        }
        std::sort(out[size_t(cid)].vertex_ids.begin(), out[size_t(cid)].vertex_ids.end());
    }
    for (uint32_t i = 0; i < g.short_edges.size(); ++i)
        out[size_t(comp_of[g.short_edges[i].src_vertex])].short_edge_ids.push_back(i);
    for (uint32_t i = 0; i < g.long_edges.size(); ++i)
        out[size_t(comp_of[g.long_edges[i].src_vertex])].long_edge_ids.push_back(i);
    return out;
}

// The five profile counters used to separate abnormal components.
struct ComponentStats {
    uint64_t n_long_flows = 0;
    uint64_t n_short_flows = 0;
    uint64_t n_short_edges = 0;
    uint64_t bytes_long = 0;  // from length histograms, bucket midpoint rule
    uint64_t bytes_short = 0; // representative lengths scaled by flow count
};

inline ComponentStats component_stats(const Component& c, const InteractionGraph& g) {
    ComponentStats s;
    s.n_long_flows = c.long_edge_ids.size();
    s.n_short_edges = c.short_edge_ids.size();
    for (uint32_t i : c.short_edge_ids) {
        const ShortEdge& e = g.short_edges[i];
        s.n_short_flows += e.flow_count;
        uint64_t rep_bytes = 0;
        for (const auto& f : e.representative_features) rep_bytes += f.length;
        s.bytes_short += e.flow_count * rep_bytes;
    }
    for (uint32_t i : c.long_edge_ids) {
        const LongEdge& e = g.long_edges[i];
        for (const auto& [code, count] : e.len_hist.bins)
            s.bytes_long += uint64_t(code * 10 + 5) * count;
    }
    return s;
}

// Nearest-rank percentile of a sample, rank = ceil(pct/100 * n).
inline double nearest_rank_percentile(std::vector<double> values, double pct) {
    std::sort(values.begin(), values.end());
    size_t rank = size_t(std::ceil(pct / 100.0 * double(values.size())));
    if (rank == 0) rank = 1;
    return values[std::min(rank, values.size()) - 1];
}

struct ComponentFilterResult {
    std::vector<uint32_t> normal;
    std::vector<uint32_t> abnormal;
    std::vector<double> distances; // per component, to the nearest cluster center
};

// Clusters the normalized 5-D statistics and reports every component whose
// distance to its nearest cluster center lies strictly above the 99th
// percentile. With no clusters at all, everything is abnormal.
inline ComponentFilterResult filter_components(const std::vector<ComponentStats>& stats,
                                               const DbscanParams& p) {
    ComponentFilterResult res;
    size_t n = stats.size();
    if (n == 0) return res;
    FeatureMatrix m(n, 5);
    for (size_t i = 0; i < n; ++i) {
        m.at(i, 0) = double(stats[i].n_long_flows);
        m.at(i, 1) = double(stats[i].n_short_flows);
        m.at(i, 2) = double(stats[i].n_short_edges);
        m.at(i, 3) = double(stats[i].bytes_long);
        m.at(i, 4) = double(stats[i].bytes_short);
    }
    FeatureMatrix nm = minmax_normalize(m);
    auto labels = dbscan(nm, p);
    int64_t k = cluster_count(labels);
    if (k == 0) {
        for (uint32_t i = 0; i < n; ++i) res.abnormal.push_back(i);
        res.distances.assign(n, std::numeric_limits<double>::infinity());
        return res;
    }
    FeatureMatrix centers(size_t(k), 5);
    std::vector<uint64_t> count(size_t(k), 0);
    for (size_t i = 0; i < n; ++i) {
        if (labels[i] < 0) continue;
        ++count[size_t(labels[i])];
        for (size_t c = 0; c < 5; ++c) centers.at(size_t(labels[i]), c) += nm.at(i, c);
    }
    for (size_t j = 0; j < size_t(k); ++j)
        for (size_t c = 0; c < 5; ++c) centers.at(j, c) /= double(count[j]);
    res.distances.resize(n);
    for (size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < size_t(k); ++j)
            best = std::min(best, distance(nm.row(i), centers.row(j)));
        res.distances[i] = best;
    }
    double cut = nearest_rank_percentile(res.distances, 99.0);
    for (uint32_t i = 0; i < n; ++i) {
        if (res.distances[i] > cut)
            res.abnormal.push_back(i);
        else
            res.normal.push_back(i);
    }
    return res;
}

} // namespace fv
