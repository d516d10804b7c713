#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "fv/dbscan.hpp"
#include "fv/features.hpp"
#include "fv/graph.hpp"

namespace fv {

// A group of structurally similar edges represented by its medoid edge.
struct PreCluster {
    std::vector<EdgeRef> members;
    EdgeRef center;      // medoid, always one of members
    double time_range = 0.0; // max last_ts - min first_ts over members
};

namespace detail {

// medoid over possibly duplicate-heavy rows: evaluate one candidate per unique
// row, weighting distances by multiplicity
inline size_t medoid_index(const FeatureMatrix& nm, const std::vector<size_t>& rows) {
    std::vector<size_t> uniq;
    std::vector<uint64_t> weight;
    std::vector<size_t> uniq_of(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        bool found = false;
        for (size_t u = 0; u < uniq.size(); ++u) {
            if (std::equal(nm.row(rows[i]).begin(), nm.row(rows[i]).end(),
                           nm.row(rows[uniq[u]]).begin())) {
                ++weight[u];
                uniq_of[i] = u;
                found = true;
                break;
            }
        }
        if (!found) {
            uniq.push_back(i);
            weight.push_back(1);
            uniq_of[i] = uniq.size() - 1;
        }
    }
    size_t best = 0;
    double best_sum = std::numeric_limits<double>::infinity();
    for (size_t u = 0; u < uniq.size(); ++u) {
        double sum = 0.0;
        for (size_t v = 0; v < uniq.size(); ++v)
            sum += double(weight[v]) *
                   distance(nm.row(rows[uniq[u]]), nm.row(rows[uniq[v]]));
        if (sum < best_sum) {
            best_sum = sum;
            best = uniq[u];
        }
    }
    return best;
}

} // namespace detail

// Pre-clusters one kind of edges by structural features: DBSCAN clusters become
// one PreCluster each with a medoid center, noise edges become singletons.
inline std::vector<PreCluster> pre_cluster(const InteractionGraph& g,
                                           const std::vector<EdgeRef>& edges,
                                           const DbscanParams& p) {
    std::vector<PreCluster> out;
    if (edges.empty()) return out;
    FeatureMatrix nm = minmax_normalize(feature_rows(g, edges, /*full=*/false));
    auto labels = dbscan(nm, p);
    int64_t k = cluster_count(labels);
    std::vector<std::vector<size_t>> groups;
    groups.resize(size_t(k));
    std::vector<size_t> singles;
    for (size_t i = 0; i < edges.size(); ++i) {
        if (labels[i] >= 0)
            groups[size_t(labels[i])].push_back(i);
        else
            singles.push_back(i);
    }
    auto emit = [&](const std::vector<size_t>& rows) {
        PreCluster pc;
        double first = g.edge_first_ts(edges[rows.front()]);
        double last = g.edge_last_ts(edges[rows.front()]);
        for (size_t i : rows) {
            pc.members.push_back(edges[i]);
            first = std::min(first, g.edge_first_ts(edges[i]));
            last = std::max(last, g.edge_last_ts(edges[i]));
        }
        pc.time_range = last - first;
        pc.center = edges[rows.size() == 1 ? rows.front() : rows[detail::medoid_index(nm, rows)]];
        out.push_back(std::move(pc));
    };
    for (const auto& rows : groups) emit(rows);
    for (size_t i : singles) emit({i});
    return out;
}

// flows stood for by one pre-cluster: flow counts for short edges, edge count
// for long edges
inline uint64_t denoted_flows(const InteractionGraph& g, const PreCluster& pc) {
    if (pc.center.kind == EdgeKind::Long) return pc.members.size();
    uint64_t n = 0;
    for (EdgeRef e : pc.members) n += g.short_edges[e.index].flow_count;
    return n;
}

} // namespace fv
