#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <thread>
#include <vector>

#include "fv/components.hpp"
#include "fv/cover.hpp"
#include "fv/features.hpp"
#include "fv/kmeans.hpp"
#include "fv/precluster.hpp"

namespace fv {

struct LossWeights {
    double alpha = 0.1;
    double beta = 0.5;
    double gamma = 1.7;
    double threshold = 10.0;
};

struct EdgeLoss {
    double loss = 0.0;
    double loss_center = 0.0;
    double loss_cluster = 0.0;
    double loss_count = 0.0;
    bool malicious = false;
};

// loss = alpha * center - beta * cluster + gamma * count; malicious iff
// strictly above the threshold
inline EdgeLoss edge_loss(double loss_center, double time_range, uint64_t denoted_flows,
                          const LossWeights& w) {
    EdgeLoss el;
    el.loss_center = loss_center;
    el.loss_cluster = time_range;
    el.loss_count = std::log2(double(denoted_flows) + 1.0);
    el.loss = w.alpha * el.loss_center - w.beta * el.loss_cluster + w.gamma * el.loss_count;
    el.malicious = el.loss > w.threshold;
    return el;
}

// K-Means state for the edges around one critical vertex. Feature rows are
// min-max normalized locally so center distances are comparable within this
// model only.
struct ClusterModel {
    std::vector<EdgeRef> edges;
    FeatureMatrix normalized;
    KMeansResult km;

    double center_distance(size_t i) const {
        double best = std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < km.centers.rows; ++c)
            best = std::min(best, distance(normalized.row(i), km.centers.row(c)));
        return best;
    }
};

inline ClusterModel vertex_cluster(const InteractionGraph& g, std::vector<EdgeRef> edges, size_t k,
                                   uint64_t seed) {
    ClusterModel m;
    m.normalized = minmax_normalize(feature_rows(g, edges, /*full=*/true));
    m.edges = std::move(edges);
    m.km = kmeans(m.normalized, k, seed);
    return m;
}

struct DetectParams {
    DbscanParams component_dbscan{};
    DbscanParams edge_dbscan{};
    size_t kmeans_k = 10;
    uint64_t seed = 0;
    uint32_t exact_vc_cutoff = 30;
    LossWeights weights{};
    unsigned threads = 1;
};

struct DetectionVerdict {
    EdgeRef edge;
    double loss = -std::numeric_limits<double>::infinity();
    double loss_center = 0.0;
    double loss_cluster = 0.0;
    double loss_count = 0.0;
    bool malicious = false;
    int64_t vertex = -1; // critical vertex the score came from, -1 if filtered out
};

struct DetectInfo {
    size_t components = 0;
    size_t abnormal_components = 0;
    size_t preclusters = 0;
    size_t critical_vertices = 0;
    double preprocess_seconds = 0.0; // connectivity split + component filter
    double detect_seconds = 0.0;     // pre-clustering, cover, clustering, loss
};

namespace detail {

inline uint64_t model_seed(uint64_t base, uint32_t vertex, EdgeKind kind) {
    return hash_mix(base ^ hash_mix((uint64_t(vertex) << 1) | uint64_t(kind)));
}

struct ComponentOutcome {
    size_t preclusters = 0;
    size_t critical = 0;
};

inline ComponentOutcome detect_component(const InteractionGraph& g, const Component& comp,
                                         const DetectParams& p,
                                         std::vector<DetectionVerdict>& verdicts,
                                         size_t long_offset) {
    ComponentOutcome outcome;
    std::vector<EdgeRef> shorts, longs;
    for (uint32_t i : comp.short_edge_ids) shorts.push_back({EdgeKind::Short, i});
    for (uint32_t i : comp.long_edge_ids) longs.push_back({EdgeKind::Long, i});

    std::vector<PreCluster> pcs = pre_cluster(g, shorts, p.edge_dbscan);
    {
        auto pcs_long = pre_cluster(g, longs, p.edge_dbscan);
        pcs.insert(pcs.end(), pcs_long.begin(), pcs_long.end());
    }
    outcome.preclusters = pcs.size();

    std::vector<EdgeRef> centers;
    centers.reserve(pcs.size());
    std::map<EdgeRef, size_t> pc_of_center;
    for (size_t i = 0; i < pcs.size(); ++i) {
        centers.push_back(pcs[i].center);
        pc_of_center.emplace(pcs[i].center, i);
    }

    std::vector<uint32_t> crit = critical_vertices(g, centers, p.exact_vc_cutoff);
    outcome.critical = crit.size();

    // best (max-loss) candidate per pre-cluster center
    std::vector<double> best_center_dist(pcs.size());
    std::vector<EdgeLoss> best_loss(pcs.size());
    std::vector<int64_t> best_vertex(pcs.size(), -1);

    for (uint32_t v : crit) {
        for (EdgeKind kind : {EdgeKind::Short, EdgeKind::Long}) {
            std::vector<EdgeRef> incident;
            std::vector<size_t> pc_idx;
            for (EdgeRef e : centers) {
                if (e.kind != kind) continue;
                if (g.edge_src(e) != v && g.edge_dst(e) != v) continue;
                incident.push_back(e);
                pc_idx.push_back(pc_of_center.at(e));
            }
            if (incident.empty()) continue;
            ClusterModel model =
                vertex_cluster(g, incident, p.kmeans_k, model_seed(p.seed, v, kind));
            for (size_t i = 0; i < incident.size(); ++i) {
                size_t pi = pc_idx[i];
                double lc = model.center_distance(i);
                EdgeLoss el =
                    edge_loss(lc, pcs[pi].time_range, denoted_flows(g, pcs[pi]), p.weights);
                if (best_vertex[pi] < 0 || el.loss > best_loss[pi].loss) {
                    best_loss[pi] = el;
                    best_vertex[pi] = int64_t(v);
                    best_center_dist[pi] = lc;
                }
            }
        }
    }

    // every member edge inherits its pre-cluster center's verdict
    for (size_t pi = 0; pi < pcs.size(); ++pi) {
        for (EdgeRef e : pcs[pi].members) {
            size_t slot = e.kind == EdgeKind::Short ? e.index : long_offset + e.index;
            DetectionVerdict& out = verdicts[slot];
            out.edge = e;
            out.loss = best_loss[pi].loss;
            out.loss_center = best_loss[pi].loss_center;
            out.loss_cluster = best_loss[pi].loss_cluster;
            out.loss_count = best_loss[pi].loss_count;
            out.malicious = best_loss[pi].malicious;
            out.vertex = best_vertex[pi];
        }
    }
    return outcome;
}

} // namespace detail

// Full per-window detection: connectivity split, abnormal-component filter,
// per-component pre-clustering, vertex cover, per-vertex clustering, loss.
// Edges of normal components keep the -inf sentinel and stay benign.
inline std::vector<DetectionVerdict> detect(const InteractionGraph& g, const DetectParams& p,
                                            DetectInfo* info = nullptr) {
    size_t long_offset = g.short_edges.size();
    std::vector<DetectionVerdict> verdicts(g.short_edges.size() + g.long_edges.size());
    for (uint32_t i = 0; i < g.short_edges.size(); ++i)
        verdicts[i].edge = {EdgeKind::Short, i};
    for (uint32_t i = 0; i < g.long_edges.size(); ++i)
        verdicts[long_offset + i].edge = {EdgeKind::Long, i};

    auto t0 = std::chrono::steady_clock::now();
    std::vector<Component> comps = components(g);
    std::vector<ComponentStats> stats;
    stats.reserve(comps.size());
    for (const auto& c : comps) stats.push_back(component_stats(c, g));
    ComponentFilterResult filt = filter_components(stats, p.component_dbscan);
    auto t1 = std::chrono::steady_clock::now();
    if (info != nullptr) {
        info->components = comps.size();
        info->abnormal_components = filt.abnormal.size();
        info->preprocess_seconds = std::chrono::duration<double>(t1 - t0).count();
    }

    std::atomic<size_t> next{0};
    std::atomic<size_t> total_pcs{0}, total_crit{0};
    auto worker = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= filt.abnormal.size()) break;
            auto outcome =
                detail::detect_component(g, comps[filt.abnormal[i]], p, verdicts, long_offset);
            total_pcs += outcome.preclusters;
            total_crit += outcome.critical;
        }
    };
    unsigned threads = std::max(1u, p.threads);
    if (threads == 1 || filt.abnormal.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < std::min<size_t>(threads, filt.abnormal.size()); ++t)
            pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (info != nullptr) {
        info->preclusters = total_pcs.load();
        info->critical_vertices = total_crit.load();
        info->detect_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
    }
    return verdicts;
}

} // namespace fv
