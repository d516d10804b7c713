#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace fv {

// Deterministic xoshiro256** generator. Distribution helpers are hand-rolled so
// streams are identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        // splitmix64 seeding
        uint64_t x = seed;
        for (auto& w : s_) {
            x += 0x9e3779b97f4a7c15ULL;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            w = z ^ (z >> 31);
        }
    }

    uint64_t next() {
        uint64_t result = rotl(s_[1] * 5, 7) * 9;
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, n)
    uint64_t uniform(uint64_t n) {
        if (n <= 1) return 0;
        uint64_t limit = ~uint64_t(0) - ~uint64_t(0) % n;
        uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % n;
    }

    // uniform in [lo, hi] inclusive
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + int64_t(uniform(uint64_t(hi - lo + 1)));
    }

    // uniform in [0, 1)
    double uniform01() { return double(next() >> 11) * 0x1.0p-53; }

    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool chance(double p) { return uniform01() < p; }

    // geometric with support {1, 2, ...}, P[X = k] = q (1-q)^(k-1)
    uint64_t geometric(double q) {
        double u = uniform01();
        if (q >= 1.0) return 1;
        double k = std::floor(std::log1p(-u) / std::log1p(-q));
        return uint64_t(k) + 1;
    }

    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

    double normal(double mean, double stddev) {
        // Box-Muller, one value per call for reproducibility
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform(i)]);
    }

    // derive an independent stream, e.g. per scenario phase
    Rng fork(uint64_t salt) { return Rng(next() ^ (salt * 0x9e3779b97f4a7c15ULL)); }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

} // namespace fv
