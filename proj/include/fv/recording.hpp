#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fv/rng.hpp"

namespace fv {

// Flow recording entropy model: a DTMC over per-packet feature values with a
// binomial stationary distribution and geometric flow lengths. Four recording
// modes are compared by expected information (nat), data scale, and density.

constexpr double kEulerMascheroni = 0.57721566490153286;
constexpr double kTwoPi = 6.28318530717958648;
constexpr double kEulerE = 2.71828182845904523;

struct RecordingDomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct DtmcParams {
    uint32_t s = 8;        // number of DTMC states
    uint32_t e_count = 26; // edges of the state diagram
    double p = 0.5;        // binomial stationary parameter
    double q = 0.7;        // geometric flow-length parameter
    uint32_t k_thresh = 15; // short/long classification threshold K
    double c_agg = 2.0;     // average flows per aggregated short edge C

    void validate(bool enforce_region = true) const {
        if (s < 2) throw RecordingDomainError("s must be >= 2");
        if (e_count < 2 || uint64_t(e_count) > uint64_t(s) * s)
            throw RecordingDomainError("e_count must lie in [2, s^2]");
        if (k_thresh < 1) throw RecordingDomainError("k_thresh must be >= 1");
        if (c_agg < 1.0) throw RecordingDomainError("c_agg must be >= 1");
        if (p <= 0.0 || p >= 1.0) throw RecordingDomainError("p must lie in (0, 1)");
        if (q <= 0.0 || q > 1.0) throw RecordingDomainError("q must lie in (0, 1]");
        if (enforce_region) {
            if (p < 0.1 || p > 0.9)
                throw RecordingDomainError("p outside the feasible region [0.1, 0.9]");
            if (q < 0.5 || q > 0.9)
                throw RecordingDomainError("q outside the feasible region [0.5, 0.9]");
        }
    }
};

struct ModeMetrics {
    double h = 0.0; // expected information, nat
    double l = 0.0; // expected data scale, storage units
    double d = 0.0; // information density h / l
};

// Entropy rate of the DTMC: ln|E| - 1/2 ln(2 pi s e p (1-p)).
inline double entropy_rate(const DtmcParams& prm) {
    double pq = prm.p * (1.0 - prm.p);
    if (pq <= 0.0) throw RecordingDomainError("p(1-p) must be positive");
    return std::log(double(prm.e_count)) -
           0.5 * std::log(kTwoPi * double(prm.s) * kEulerE * pq);
}

inline ModeMetrics mode_ideal(const DtmcParams& prm) {
    double rate = entropy_rate(prm);
    ModeMetrics m;
    m.l = 1.0 / prm.q;
    m.h = rate / prm.q;
    m.d = m.h / m.l;
    return m;
}

inline ModeMetrics mode_sampling(const DtmcParams& prm) {
    double pq = prm.p * (1.0 - prm.p);
    if (pq <= 0.0) throw RecordingDomainError("p(1-p) must be positive");
    ModeMetrics m;
    m.h = 0.5 * std::log(kTwoPi * kEulerE * double(prm.s) * pq) +
          0.5 * std::log(2.0) * prm.q * (1.0 - prm.q);
    m.l = 1.0;
    m.d = m.h / m.l;
    return m;
}

inline ModeMetrics mode_event(const DtmcParams& prm) {
    double a = std::pow(prm.p, double(prm.s)); // per-packet event probability p^s
    if (a <= 0.0) throw RecordingDomainError("p^s underflowed to zero");
    double zeta = prm.q * (1.0 - a);
    double eta = prm.q + a * (1.0 - prm.q); // always positive, so l > 0
    double theta = zeta / eta;
    ModeMetrics m;
    m.h = theta > 0.0 ? -2.0 * theta * std::log(theta) : 0.0;
    m.l = a / eta;
    m.d = m.h / m.l;
    return m;
}

// Graph-based recording: short flows keep the full feature sequence (shared by
// C flows per edge), long flows keep s histogram counters.
inline ModeMetrics mode_graph(const DtmcParams& prm) {
    double rate = entropy_rate(prm);
    double q = prm.q;
    double K = double(prm.k_thresh);
    double s = double(prm.s);
    double tail = std::pow(1.0 - q, K); // (1-q)^K, probability mass of long flows
    double short_weight = (1.0 - (K * q + 1.0) * tail) / q;
    double long_h = 0.25 * s * tail *
                    ((1.0 + s) * std::log(prm.p * s) + 2.0 * std::log(kTwoPi * kEulerE) +
                     2.0 * q * std::log(K) - 2.0 * s * (1.0 + prm.p + kEulerMascheroni));
    ModeMetrics m;
    m.h = short_weight * rate + long_h;
    m.l = s * tail + short_weight / prm.c_agg;
    m.d = m.h / m.l;
    return m;
}

enum class RecordingMode { Ideal, Graph, Sampling, Event };

inline ModeMetrics mode_metrics(RecordingMode mode, const DtmcParams& prm) {
    switch (mode) {
        case RecordingMode::Ideal: return mode_ideal(prm);
        case RecordingMode::Graph: return mode_graph(prm);
        case RecordingMode::Sampling: return mode_sampling(prm);
        default: return mode_event(prm);
    }
}

// --- numeric integration over the feasible region ---------------------------

constexpr double kRegionPLo = 0.1, kRegionPHi = 0.9;
constexpr double kRegionQLo = 0.5, kRegionQHi = 0.9;

// composite 2-D trapezoid rule on an (n+1) x (n+1) grid over the region
template <typename F>
double integrate_region(F&& f, uint32_t grid_n) {
    if (grid_n < 32) throw std::invalid_argument("grid_n must be >= 32");
    double hp = (kRegionPHi - kRegionPLo) / grid_n;
    double hq = (kRegionQHi - kRegionQLo) / grid_n;
    double sum = 0.0;
    for (uint32_t i = 0; i <= grid_n; ++i) {
        double p = kRegionPLo + hp * i;
        double wi = (i == 0 || i == grid_n) ? 0.5 : 1.0;
        for (uint32_t j = 0; j <= grid_n; ++j) {
            double q = kRegionQLo + hq * j;
            double wj = (j == 0 || j == grid_n) ? 0.5 : 1.0;
            sum += wi * wj * f(p, q);
        }
    }
    return sum * hp * hq;
}

// integral of the information density of one mode over the feasible region
inline double integrate_density(RecordingMode mode, const DtmcParams& base, uint32_t grid_n) {
    return integrate_region(
        [&](double p, double q) {
            DtmcParams prm = base;
            prm.p = p;
            prm.q = q;
            return mode_metrics(mode, prm).d;
        },
        grid_n);
}

// --- concrete DTMC synthesis and Monte Carlo oracle -------------------------

// A realized state diagram: simple directed graph with equal edge weights,
// in-degree == out-degree per state, degree profile following the renormalized
// binomial pmf as closely as e_count distinct edges allow. The stationary
// distribution is exactly degree/e_count.
struct DtmcChain {
    uint32_t s = 0;
    uint32_t e_count = 0;
    std::vector<std::vector<uint32_t>> out; // adjacency, states 0-based
    std::vector<uint32_t> degree;
    std::vector<double> stationary;

    // exact entropy rate of the uniform walk on this diagram
    double exact_entropy_rate() const {
        double r = 0.0;
        for (uint32_t i = 0; i < s; ++i)
            if (degree[i] > 0) r += stationary[i] * std::log(double(degree[i]));
        return r;
    }
};

namespace detail {

inline std::vector<double> renormalized_binomial(uint32_t s, double p) {
    // pmf of B(s, p) over 1..s, the zero state removed and renormalized
    std::vector<double> pmf(s, 0.0);
    double logp = std::log(p), logq = std::log(1.0 - p);
    double total = 0.0;
    for (uint32_t k = 1; k <= s; ++k) {
        double lg = std::lgamma(double(s) + 1.0) - std::lgamma(double(k) + 1.0) -
                    std::lgamma(double(s - k) + 1.0) + double(k) * logp + double(s - k) * logq;
        pmf[k - 1] = std::exp(lg);
        total += pmf[k - 1];
    }
    for (auto& v : pmf) v /= total;
    return pmf;
}

// Gale-Ryser feasibility for a simple digraph with in-degree == out-degree
// == d per state, self-loops allowed (bipartite realization with equal margins)
inline bool degrees_realizable(const std::vector<uint32_t>& d) {
    std::vector<uint32_t> r(d);
    std::sort(r.begin(), r.end(), std::greater<>());
    uint64_t lhs = 0;
    for (size_t k = 1; k <= r.size(); ++k) {
        lhs += r[k - 1];
        uint64_t rhs = 0;
        for (uint32_t c : d) rhs += std::min<uint64_t>(c, k);
        if (lhs > rhs) return false;
    }
    return true;
}

// largest-remainder apportionment of e edges over the pmf, flattened one unit
// at a time until the degree sequence is realizable as a simple state diagram
inline std::vector<uint32_t> apportion_degrees(const std::vector<double>& pmf, uint32_t e) {
    size_t s = pmf.size();
    std::vector<uint32_t> d(s, 0);
    std::vector<double> target(s);
    uint32_t assigned = 0;
    for (size_t i = 0; i < s; ++i) {
        target[i] = pmf[i] * e;
        d[i] = uint32_t(std::floor(target[i]));
        assigned += d[i];
    }
    std::vector<size_t> order(s);
    std::iota(order.begin(), order.end(), size_t(0));
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        double ra = target[a] - std::floor(target[a]);
        double rb = target[b] - std::floor(target[b]);
        if (ra != rb) return ra > rb;
        return a < b;
    });
    for (size_t k = 0; assigned < e; k = (k + 1) % s) {
        ++d[order[k]];
        ++assigned;
    }
    for (int guard = 0; guard < 65536 && !degrees_realizable(d); ++guard) {
        size_t from = size_t(std::max_element(d.begin(), d.end()) - d.begin());
        // receiver: the most under-target state that stays below the donor
        int64_t to = -1;
        double best_gap = -1e300;
        for (size_t i = 0; i < s; ++i) {
            if (i == from || d[i] + 1 >= d[from]) continue;
            double gap = target[i] - double(d[i]);
            if (gap > best_gap) {
                best_gap = gap;
                to = int64_t(i);
            }
        }
        if (to < 0) break; // flat profile, realizable for e <= s^2
        --d[from];
        ++d[size_t(to)];
    }
    return d;
}

} // namespace detail

// Builds the state diagram for the oracle. The seed only perturbs tie-breaking
// so the construction is deterministic per (s, e_count, p, seed).
inline DtmcChain synth_dtmc(uint32_t s, uint32_t e_count, double p, uint64_t seed) {
    DtmcParams check{s, e_count, p, 0.7, 1, 1.0};
    check.validate(false);
    DtmcChain chain;
    chain.s = s;
    chain.e_count = e_count;
    chain.degree = detail::apportion_degrees(detail::renormalized_binomial(s, p), e_count);

    // tie-break priorities from the seed
    Rng rng(seed);
    std::vector<uint64_t> prio(s);
    for (auto& v : prio) v = rng.next();

    // bipartite realization: rows take the columns with the most remaining
    // in-capacity (Gale-Ryser greedy); self-loops allowed
    std::vector<uint32_t> in_need = chain.degree;
    chain.out.assign(s, {});
    std::vector<uint32_t> rows(s);
    std::iota(rows.begin(), rows.end(), 0u);
    std::sort(rows.begin(), rows.end(), [&](uint32_t a, uint32_t b) {
        if (chain.degree[a] != chain.degree[b]) return chain.degree[a] > chain.degree[b];
        return a < b;
    });
    for (uint32_t r : rows) {
        uint32_t need = chain.degree[r];
        if (need == 0) continue;
        std::vector<uint32_t> cols;
        for (uint32_t c = 0; c < s; ++c)
            if (in_need[c] > 0) cols.push_back(c);
        if (cols.size() < need) throw std::logic_error("degree sequence not realizable");
        std::sort(cols.begin(), cols.end(), [&](uint32_t a, uint32_t b) {
            if (in_need[a] != in_need[b]) return in_need[a] > in_need[b];
            if (prio[a] != prio[b]) return prio[a] < prio[b];
            return a < b;
        });
        cols.resize(need);
        std::sort(cols.begin(), cols.end());
        for (uint32_t c : cols) --in_need[c];
        chain.out[r] = std::move(cols);
    }
    chain.stationary.resize(s);
    for (uint32_t i = 0; i < s; ++i)
        chain.stationary[i] = double(chain.degree[i]) / double(e_count);
    return chain;
}

struct MonteCarloMetrics {
    ModeMetrics ideal, graph, sampling, event;
    double mean_flow_len = 0.0;
    double entropy_rate_hat = 0.0;
};

namespace detail {

inline double plugin_entropy(const std::map<int64_t, uint64_t>& hist, uint64_t n) {
    double h = 0.0;
    for (const auto& [v, c] : hist) {
        double f = double(c) / double(n);
        h -= f * std::log(f);
    }
    return h;
}

} // namespace detail

// Simulates n_flows geometric-length walks on a synthesized diagram and applies
// each mode's recording rule. Entropies are plug-in estimates (bias noted: the
// estimator underestimates slightly for sparsely observed values).
inline MonteCarloMetrics monte_carlo(const DtmcParams& prm, uint64_t n_flows, uint64_t seed) {
    prm.validate(false);
    if (n_flows < 10000) throw std::invalid_argument("n_flows must be >= 1e4");
    DtmcChain chain = synth_dtmc(prm.s, prm.e_count, prm.p, seed);
    Rng rng(seed ^ 0x5bf0363546d9e3a1ULL);
    uint32_t s = prm.s;

    // cumulative degree table for stationary draws
    std::vector<uint64_t> cum(s + 1, 0);
    for (uint32_t i = 0; i < s; ++i) cum[i + 1] = cum[i] + chain.degree[i];
    auto stationary_draw = [&]() {
        uint64_t r = rng.uniform(chain.e_count);
        uint32_t st = 0;
        while (cum[st + 1] <= r) ++st;
        return st;
    };

    std::vector<uint64_t> trans(size_t(s) * s, 0); // transition counts
    std::map<int64_t, std::map<int64_t, uint64_t>> sum_by_len; // L -> histogram of sums
    std::vector<std::map<int64_t, uint64_t>> counters(s); // per-state histogram of counters (long flows)
    double a = std::pow(prm.p, double(prm.s));
    if (a <= 0.0) throw RecordingDomainError("p^s underflowed to zero");

    uint64_t total_len = 0, total_trans = 0, n_long = 0;
    uint64_t short_len_total = 0;
    double no_event_sum = 0.0; // mean of (1-a)^L, the exact no-fire probability per flow
    std::vector<uint64_t> cnt(s);
    for (uint64_t f = 0; f < n_flows; ++f) {
        uint64_t len = rng.geometric(prm.q);
        total_len += len;
        std::fill(cnt.begin(), cnt.end(), 0);
        uint32_t st = stationary_draw();
        int64_t sum = st + 1;
        ++cnt[st];
        for (uint64_t i = 1; i < len; ++i) {
            uint32_t nxt = chain.out[st][size_t(rng.uniform(chain.degree[st]))];
            ++trans[size_t(st) * s + nxt];
            ++total_trans;
            st = nxt;
            sum += st + 1;
            ++cnt[st];
        }
        ++sum_by_len[int64_t(len)][sum];
        if (len > prm.k_thresh) {
            ++n_long;
            for (uint32_t i = 0; i < s; ++i) ++counters[i][int64_t(cnt[i])];
        } else {
            short_len_total += len;
        }
        no_event_sum += std::pow(1.0 - a, double(len));
    }

    MonteCarloMetrics mc;
    mc.mean_flow_len = double(total_len) / double(n_flows);

    // plug-in conditional entropy of one transition
    double rate = 0.0;
    std::vector<uint64_t> row_tot(s, 0);
    for (uint32_t i = 0; i < s; ++i)
        for (uint32_t j = 0; j < s; ++j) row_tot[i] += trans[size_t(i) * s + j];
    for (uint32_t i = 0; i < s; ++i) {
        for (uint32_t j = 0; j < s; ++j) {
            uint64_t c = trans[size_t(i) * s + j];
            if (c == 0) continue;
            double fij = double(c) / double(total_trans);
            rate += fij * std::log(double(row_tot[i]) / double(c));
        }
    }
    mc.entropy_rate_hat = rate;

    mc.ideal.h = mc.mean_flow_len * rate;
    mc.ideal.l = mc.mean_flow_len;
    mc.ideal.d = mc.ideal.h / mc.ideal.l;

    // sampling: conditional plug-in entropy of the per-flow feature sum given L
    double h_samp = 0.0;
    for (const auto& [len, hist] : sum_by_len) {
        uint64_t nl = 0;
        for (const auto& [v, c] : hist) nl += c;
        h_samp += double(nl) / double(n_flows) * detail::plugin_entropy(hist, nl);
    }
    mc.sampling.h = h_samp;
    mc.sampling.l = 1.0;
    mc.sampling.d = h_samp;

    // event: two-point entropy of the indicator, probability estimated from the
    // exact per-flow no-fire chance (Rao-Blackwell over the coin draws)
    double theta = no_event_sum / double(n_flows);
    double h_eve = 0.0;
    if (theta > 0.0 && theta < 1.0)
        h_eve = -theta * std::log(theta) - (1.0 - theta) * std::log(1.0 - theta);
    mc.event.h = h_eve;
    mc.event.l = 1.0 - theta;
    mc.event.d = mc.event.l > 0.0 ? mc.event.h / mc.event.l : 0.0;

    // graph: per-packet sequences for short flows, s counters for long flows
    double h_long = 0.0;
    if (n_long > 0)
        for (uint32_t i = 0; i < s; ++i)
            h_long += detail::plugin_entropy(counters[i], n_long);
    mc.graph.h = double(short_len_total) / double(n_flows) * rate +
                 double(n_long) / double(n_flows) * h_long;
    mc.graph.l = (double(short_len_total) / prm.c_agg + double(n_long) * double(s)) /
                 double(n_flows);
    mc.graph.d = mc.graph.l > 0.0 ? mc.graph.h / mc.graph.l : 0.0;
    return mc;
}

} // namespace fv
