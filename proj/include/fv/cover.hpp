#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "fv/graph.hpp"

namespace fv {

namespace vc {

// Branch-and-bound minimum vertex cover on graphs of up to 64 vertices,
// exact for the sizes the detector sends here (<= exact cutoff). Determinism:
// branching picks the highest-degree vertex (lowest id on ties) and explores
// the include branch first, so among equal-size optima the earlier include
// choice wins; an isolated edge resolves to its lower endpoint.
class ExactSolver {
public:
    ExactSolver(size_t n, const std::vector<std::pair<uint32_t, uint32_t>>& edges) : n_(n) {
        if (n > 64) throw std::invalid_argument("exact cover solver limited to 64 vertices");
        adj_.assign(n, 0);
        for (auto [a, b] : edges) {
            if (a == b) {
                forced_ |= bit(a); // self-loop: the vertex itself must be chosen
                continue;
            }
            adj_[a] |= bit(b);
            adj_[b] |= bit(a);
        }
    }

    std::vector<uint32_t> solve() {
        uint64_t avail = n_ == 64 ? ~uint64_t(0) : (bit(uint32_t(n_)) - 1);
        avail &= ~forced_;
        best_ = ~uint64_t(0);
        best_size_ = n_ + 1;
        search(avail, forced_, popcount(forced_));
        std::vector<uint32_t> out;
        for (uint32_t v = 0; v < n_; ++v)
            if (best_ & bit(v)) out.push_back(v);
        return out;
    }

private:
    static uint64_t bit(uint32_t v) { return uint64_t(1) << v; }
    static uint32_t popcount(uint64_t x) { return uint32_t(__builtin_popcountll(x)); }

    void search(uint64_t avail, uint64_t chosen, uint32_t size) {
        if (size >= best_size_) return;
        // reductions: drop isolated vertices, resolve degree-1 vertices
        bool again = true;
        while (again) {
            again = false;
            for (uint64_t rest = avail; rest != 0;) {
                uint32_t v = uint32_t(__builtin_ctzll(rest));
                rest &= rest - 1;
                uint64_t nb = adj_[v] & avail;
                if (nb == 0) {
                    avail &= ~bit(v);
                    continue;
                }
                if (popcount(nb) == 1) {
                    uint32_t u = uint32_t(__builtin_ctzll(nb));
                    // isolated edge: prefer the lower endpoint
                    uint32_t take = popcount(adj_[u] & avail) == 1 ? std::min(u, v) : u;
                    chosen |= bit(take);
                    ++size;
                    avail &= ~(bit(take) | bit(v) | bit(u));
                    if (size >= best_size_) return;
                    again = true;
                    break;
                }
            }
        }
        // find the branching vertex and count remaining edges
        uint32_t branch = 0, branch_deg = 0;
        uint64_t edges2 = 0; // twice the edge count
        for (uint64_t rest = avail; rest != 0;) {
            uint32_t v = uint32_t(__builtin_ctzll(rest));
            rest &= rest - 1;
            uint32_t deg = popcount(adj_[v] & avail);
            edges2 += deg;
            if (deg > branch_deg) {
                branch_deg = deg;
                branch = v;
            }
        }
        if (edges2 == 0) {
            best_ = chosen;
            best_size_ = size;
            return;
        }
        // lower bound: each chosen vertex covers at most branch_deg edges
        uint32_t lb = uint32_t((edges2 / 2 + branch_deg - 1) / branch_deg);
        if (size + lb >= best_size_) return;

        uint64_t nb = adj_[branch] & avail;
        search(avail & ~bit(branch), chosen | bit(branch), size + 1);
        search(avail & ~(nb | bit(branch)), chosen | nb, size + popcount(nb));
    }

    size_t n_;
    std::vector<uint64_t> adj_;
    uint64_t forced_ = 0;
    uint64_t best_ = 0;
    uint32_t best_size_ = 0;
};

// Max-degree greedy cover; always valid, used past the exact cutoff.
inline std::vector<uint32_t> greedy_cover(size_t n,
                                          const std::vector<std::pair<uint32_t, uint32_t>>& edges) {
    std::vector<std::vector<uint32_t>> adj(n);
    std::vector<uint32_t> out;
    std::vector<bool> in_cover(n, false);
    std::vector<uint32_t> deg(n, 0);
    for (auto [a, b] : edges) {
        if (a == b) {
            if (!in_cover[a]) {
                in_cover[a] = true;
                out.push_back(a);
            }
            continue;
        }
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<bool> removed(n, false);
    for (size_t v = 0; v < n; ++v) {
        removed[v] = in_cover[v];
        deg[v] = uint32_t(adj[v].size());
    }
    auto live_degree = [&](uint32_t v) {
        uint32_t d = 0;
        for (uint32_t u : adj[v])
            if (!removed[u]) ++d;
        return d;
    };
    while (true) {
        uint32_t best = 0, best_deg = 0;
        for (uint32_t v = 0; v < n; ++v) {
            if (removed[v]) continue;
            uint32_t d = live_degree(v);
            if (d > best_deg) {
                best_deg = d;
                best = v;
            }
        }
        if (best_deg == 0) break;
        removed[best] = true;
        in_cover[best] = true;
        out.push_back(best);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace vc

// Critical vertices of a component: a minimum (or 2-approximate, past the
// cutoff) vertex cover of its representative edges, as graph vertex ids.
inline std::vector<uint32_t> critical_vertices(const InteractionGraph& g,
                                               const std::vector<EdgeRef>& center_edges,
                                               uint32_t exact_cutoff = 30) {
    // local ids follow graph vertex id order so id tie-breaks are global
    std::map<uint32_t, uint32_t> compact;
    for (EdgeRef e : center_edges) {
        compact.emplace(g.edge_src(e), 0);
        compact.emplace(g.edge_dst(e), 0);
    }
    std::vector<uint32_t> back;
    back.reserve(compact.size());
    for (auto& [v, id] : compact) {
        id = uint32_t(back.size());
        back.push_back(v);
    }
    std::vector<std::pair<uint32_t, uint32_t>> edges;
    for (EdgeRef e : center_edges)
        edges.emplace_back(compact.at(g.edge_src(e)), compact.at(g.edge_dst(e)));
    std::vector<uint32_t> cover_local =
        back.size() <= exact_cutoff ? vc::ExactSolver(back.size(), edges).solve()
                                    : vc::greedy_cover(back.size(), edges);
    std::vector<uint32_t> out;
    out.reserve(cover_local.size());
    for (uint32_t v : cover_local) out.push_back(back[v]);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace fv
