#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fv/kdtree.hpp"
#include "fv/matrix.hpp"

namespace fv {

struct DbscanParams {
    double eps = 4e-3;
    size_t min_points = 40;

    void validate() const {
        if (eps <= 0) throw std::invalid_argument("eps must be > 0");
        if (min_points < 1) throw std::invalid_argument("min_points must be >= 1");
    }
};

constexpr int64_t kNoise = -1;

// DBSCAN with euclidean metric and the KD-tree for neighborhood search.
//   - a point is core iff its eps-ball (inclusive, counting itself) holds at
//     least min_points points
//   - clusters are numbered by the smallest row index of any core they contain
//   - border points joining several clusters take the lowest cluster id
// Duplicate rows are collapsed to weighted points first; identical rows always
// receive identical labels, so the collapse is exact.
inline std::vector<int64_t> dbscan(const FeatureMatrix& m, const DbscanParams& p) {
    p.validate();
    std::vector<int64_t> labels(m.rows, kNoise);
    if (m.rows == 0) return labels;

    // collapse exact duplicates
    std::vector<uint32_t> order(m.rows);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        auto ra = m.row(a), rb = m.row(b);
        for (size_t c = 0; c < m.cols; ++c)
            if (ra[c] != rb[c]) return ra[c] < rb[c];
        return a < b;
    });
    std::vector<uint32_t> uniq_rep;       // representative original row per unique point
    std::vector<uint64_t> weight;         // multiplicity
    std::vector<uint32_t> first_orig;     // smallest original row index per unique point
    std::vector<uint32_t> uniq_of(m.rows); // original row -> unique id
    for (size_t i = 0; i < order.size();) {
        size_t j = i;
        uint32_t mn = order[i];
        while (j < order.size() && std::equal(m.row(order[i]).begin(), m.row(order[i]).end(),
                                              m.row(order[j]).begin()))
            mn = std::min(mn, order[j]), ++j;
        uint32_t uid = uint32_t(uniq_rep.size());
        uniq_rep.push_back(order[i]);
        weight.push_back(j - i);
        first_orig.push_back(mn);
        for (size_t k = i; k < j; ++k) uniq_of[order[k]] = uid;
        i = j;
    }

    FeatureMatrix um(uniq_rep.size(), m.cols);
    for (size_t u = 0; u < uniq_rep.size(); ++u)
        std::copy(m.row(uniq_rep[u]).begin(), m.row(uniq_rep[u]).end(), um.row(u).begin());
    KdTree tree(um);

    std::vector<std::vector<uint32_t>> nbrs(um.rows);
    std::vector<bool> core(um.rows, false);
    for (size_t u = 0; u < um.rows; ++u) {
        nbrs[u] = tree.range_query(um.row(u), p.eps);
        uint64_t w = 0;
        for (uint32_t v : nbrs[u]) w += weight[v];
        core[u] = w >= p.min_points;
    }

    // grow clusters over density-connected cores, seeds in original-row order
    std::vector<uint32_t> seeds(um.rows);
    std::iota(seeds.begin(), seeds.end(), 0u);
    std::sort(seeds.begin(), seeds.end(),
              [&](uint32_t a, uint32_t b) { return first_orig[a] < first_orig[b]; });
    std::vector<int64_t> ulabel(um.rows, kNoise);
    int64_t next_cluster = 0;
    for (uint32_t seed : seeds) {
        if (!core[seed] || ulabel[seed] != kNoise) continue;
        int64_t cid = next_cluster++;
        std::deque<uint32_t> frontier{seed};
        ulabel[seed] = cid;
        while (!frontier.empty()) {
            uint32_t u = frontier.front();
            frontier.pop_front();
            for (uint32_t v : nbrs[u]) {
                if (core[v] && ulabel[v] == kNoise) {
                    ulabel[v] = cid;
                    frontier.push_back(v);
                }
            }
        }
    }
    // border points: lowest cluster id among reachable cores
    for (size_t u = 0; u < um.rows; ++u) {
        if (core[u] || ulabel[u] != kNoise) continue;
        int64_t best = kNoise;
        for (uint32_t v : nbrs[u])
            if (core[v] && (best == kNoise || ulabel[v] < best)) best = ulabel[v];
        ulabel[u] = best;
    }

    for (size_t i = 0; i < m.rows; ++i) labels[i] = ulabel[uniq_of[i]];
    return labels;
}

inline int64_t cluster_count(const std::vector<int64_t>& labels) {
    int64_t mx = -1;
    for (int64_t l : labels) mx = std::max(mx, l);
    return mx + 1;
}

} // namespace fv
