#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace fv {

// Dense row-major matrix of finite reals; one row per sample.
struct FeatureMatrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    FeatureMatrix() = default;
    FeatureMatrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {
        if (c == 0) throw std::invalid_argument("matrix needs at least one column");
    }

    double& at(size_t r, size_t c) { return data[r * cols + c]; }
    double at(size_t r, size_t c) const { return data[r * cols + c]; }

    std::span<const double> row(size_t r) const { return {data.data() + r * cols, cols}; }
    std::span<double> row(size_t r) { return {data.data() + r * cols, cols}; }

    void check_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
    }
};

inline double sq_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(sq_distance(a, b));
}

// Maps every column onto [0, 1]; constant columns collapse to zero.
inline FeatureMatrix minmax_normalize(const FeatureMatrix& m) {
    FeatureMatrix out = m;
    for (size_t c = 0; c < m.cols; ++c) {
        if (m.rows == 0) break;
        double lo = m.at(0, c), hi = m.at(0, c);
        for (size_t r = 1; r < m.rows; ++r) {
            lo = std::min(lo, m.at(r, c));
            hi = std::max(hi, m.at(r, c));
        }
        double span = hi - lo;
        for (size_t r = 0; r < m.rows; ++r)
            out.at(r, c) = span > 0.0 ? (m.at(r, c) - lo) / span : 0.0;
    }
    return out;
}

} // namespace fv
