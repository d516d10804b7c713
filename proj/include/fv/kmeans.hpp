#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fv/matrix.hpp"
#include "fv/rng.hpp"

namespace fv {

struct KMeansResult {
    FeatureMatrix centers;          // effective_k x d
    std::vector<uint32_t> assign;   // nearest-center index per row
};

namespace detail {

inline uint32_t nearest_center(const FeatureMatrix& centers, std::span<const double> p) {
    uint32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < centers.rows; ++c) {
        double d = sq_distance(centers.row(c), p);
        if (d < best_d) {
            best_d = d;
            best = uint32_t(c);
        }
    }
    return best;
}

} // namespace detail

// Lloyd's algorithm with k-means++ seeding from a seeded generator. Runs to a
// stable assignment or 100 iterations; empty clusters are reseeded at the point
// farthest from its current center. Effective k is min(k, n). When `sse_trace`
// is given it records the within-cluster SSE after every iteration.
inline KMeansResult kmeans(const FeatureMatrix& m, size_t k, uint64_t seed,
                           std::vector<double>* sse_trace = nullptr) {
    if (m.rows == 0) throw std::invalid_argument("kmeans requires at least one row");
    size_t eff_k = std::min(k, m.rows);
    if (eff_k == 0) throw std::invalid_argument("k must be >= 1");
    Rng rng(seed);

    FeatureMatrix centers(eff_k, m.cols);
    // k-means++ seeding
    std::vector<double> dist_sq(m.rows, std::numeric_limits<double>::infinity());
    size_t first = size_t(rng.uniform(m.rows));
    std::copy(m.row(first).begin(), m.row(first).end(), centers.row(0).begin());
    for (size_t c = 1; c < eff_k; ++c) {
        double total = 0.0;
        for (size_t r = 0; r < m.rows; ++r) {
            dist_sq[r] = std::min(dist_sq[r], sq_distance(m.row(r), centers.row(c - 1)));
            total += dist_sq[r];
        }
        size_t pick = 0;
        if (total > 0.0) {
            double target = rng.uniform01() * total;
            double acc = 0.0;
            pick = m.rows - 1;
            for (size_t r = 0; r < m.rows; ++r) {
                acc += dist_sq[r];
                if (acc >= target && dist_sq[r] > 0.0) {
                    pick = r;
                    break;
                }
            }
        } else {
            pick = size_t(rng.uniform(m.rows)); // all points coincide with centers
        }
        std::copy(m.row(pick).begin(), m.row(pick).end(), centers.row(c).begin());
    }

    std::vector<uint32_t> assign(m.rows, 0);
    std::vector<uint64_t> count(eff_k, 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = iter == 0;
        for (size_t r = 0; r < m.rows; ++r) {
            uint32_t c = detail::nearest_center(centers, m.row(r));
            if (c != assign[r]) {
                assign[r] = c;
                changed = true;
            }
        }
        // reseed empty clusters at the point farthest from its own center
        std::fill(count.begin(), count.end(), 0);
        for (uint32_t a : assign) ++count[a];
        for (size_t c = 0; c < eff_k; ++c) {
            if (count[c] != 0) continue;
            size_t far = 0;
            double far_d = -1.0;
            for (size_t r = 0; r < m.rows; ++r) {
                double d = sq_distance(m.row(r), centers.row(assign[r]));
                if (d > far_d) {
                    far_d = d;
                    far = r;
                }
            }
            std::copy(m.row(far).begin(), m.row(far).end(), centers.row(c).begin());
            --count[assign[far]];
            assign[far] = uint32_t(c);
            count[c] = 1;
            changed = true;
        }
        // update step: each center becomes the mean of its rows
        std::fill(centers.data.begin(), centers.data.end(), 0.0);
        for (size_t r = 0; r < m.rows; ++r)
            for (size_t c = 0; c < m.cols; ++c) centers.at(assign[r], c) += m.at(r, c);
        for (size_t c = 0; c < eff_k; ++c)
            for (size_t d = 0; d < m.cols; ++d)
                if (count[c] > 0) centers.at(c, d) /= double(count[c]);
        if (sse_trace != nullptr) {
            double s = 0.0;
            for (size_t r = 0; r < m.rows; ++r) s += sq_distance(m.row(r), centers.row(assign[r]));
            sse_trace->push_back(s);
        }
        if (!changed) break;
    }
    return {std::move(centers), std::move(assign)};
}

inline double kmeans_sse(const FeatureMatrix& m, const KMeansResult& km) {
    double s = 0.0;
    for (size_t r = 0; r < m.rows; ++r) s += sq_distance(m.row(r), km.centers.row(km.assign[r]));
    return s;
}

} // namespace fv
