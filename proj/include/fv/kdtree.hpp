#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "fv/matrix.hpp"

namespace fv {

// Static KD-tree over the rows of a FeatureMatrix. Splits at the median of the
// widest dimension; leaves hold up to 16 points.
class KdTree {
public:
    static constexpr size_t kLeafSize = 16;

    explicit KdTree(const FeatureMatrix& m) : m_(m) {
        idx_.resize(m.rows);
        std::iota(idx_.begin(), idx_.end(), 0u);
        if (m.rows > 0) root_ = build(0, m.rows);
    }

    // indices of all rows with euclidean distance <= eps from `q` (inclusive)
    std::vector<uint32_t> range_query(std::span<const double> q, double eps) const {
        std::vector<uint32_t> out;
        if (m_.rows > 0) query(root_, q, eps * eps, out);
        return out;
    }

private:
    struct Node {
        // leaf: [begin, end) into idx_; internal: split dim/value and children
        uint32_t begin = 0, end = 0;
        int32_t left = -1, right = -1;
        uint32_t dim = 0;
        double split = 0.0;
        std::vector<double> lo, hi; // bounding box
    };

    int32_t build(size_t begin, size_t end) {
        Node n;
        n.begin = uint32_t(begin);
        n.end = uint32_t(end);
        n.lo.assign(m_.cols, 0.0);
        n.hi.assign(m_.cols, 0.0);
        for (size_t c = 0; c < m_.cols; ++c) {
            double lo = m_.at(idx_[begin], c), hi = lo;
            for (size_t i = begin + 1; i < end; ++i) {
                double v = m_.at(idx_[i], c);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            n.lo[c] = lo;
            n.hi[c] = hi;
        }
        if (end - begin <= kLeafSize) {
            nodes_.push_back(std::move(n));
            return int32_t(nodes_.size() - 1);
        }
        size_t dim = 0;
        double widest = -1.0;
        for (size_t c = 0; c < m_.cols; ++c) {
            double w = n.hi[c] - n.lo[c];
            if (w > widest) {
                widest = w;
                dim = c;
            }
        }
        if (widest <= 0.0) { // all points identical: keep as one leaf
            nodes_.push_back(std::move(n));
            return int32_t(nodes_.size() - 1);
        }
        size_t mid = begin + (end - begin) / 2;
        std::nth_element(idx_.begin() + long(begin), idx_.begin() + long(mid),
                         idx_.begin() + long(end), [&](uint32_t a, uint32_t b) {
                             double va = m_.at(a, dim), vb = m_.at(b, dim);
                             if (va != vb) return va < vb;
                             return a < b;
                         });
        n.dim = uint32_t(dim);
        n.split = m_.at(idx_[mid], dim);
        int32_t self = int32_t(nodes_.size());
        nodes_.push_back(std::move(n));
        int32_t l = build(begin, mid);
        int32_t r = build(mid, end);
        nodes_[size_t(self)].left = l;
        nodes_[size_t(self)].right = r;
        return self;
    }

    void query(int32_t ni, std::span<const double> q, double eps_sq,
               std::vector<uint32_t>& out) const {
        const Node& n = nodes_[size_t(ni)];
        // prune on the distance from q to the node's bounding box
        double box_dist = 0.0;
        for (size_t c = 0; c < m_.cols; ++c) {
            double d = 0.0;
            if (q[c] < n.lo[c])
                d = n.lo[c] - q[c];
            else if (q[c] > n.hi[c])
                d = q[c] - n.hi[c];
            box_dist += d * d;
            if (box_dist > eps_sq) return;
        }
        if (n.left < 0) {
            for (uint32_t i = n.begin; i < n.end; ++i) {
                uint32_t r = idx_[i];
                if (sq_distance(m_.row(r), q) <= eps_sq) out.push_back(r);
            }
            return;
        }
        query(n.left, q, eps_sq, out);
        query(n.right, q, eps_sq, out);
    }

    const FeatureMatrix& m_;
    std::vector<uint32_t> idx_;
    std::vector<Node> nodes_;
    int32_t root_ = -1;
};

} // namespace fv
