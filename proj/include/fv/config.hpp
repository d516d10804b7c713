#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fv/detect.hpp"
#include "fv/flow.hpp"

namespace fv {

// Configuration problems that should surface as exit code 3 at the CLI.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All pipeline hyper-parameters with their recommended defaults.
struct Config {
    double pkt_timeout = 10.0;   // flow completion threshold, seconds
    uint32_t flow_line = 15;     // short/long classification threshold, packets
    uint32_t agg_line = 20;      // short flow aggregation threshold
    double eps = 4e-3;           // DBSCAN radius for components and edges
    uint32_t min_points = 40;    // DBSCAN minimum points
    uint32_t kmeans_k = 10;      // per-vertex K-Means cluster count
    double threshold = 10.0;     // loss threshold T
    double alpha = 0.1;          // loss_center weight
    double beta = 0.5;           // loss_cluster weight
    double gamma = 1.7;          // loss_count weight
    double judge_interval = 1.0; // completion check cadence, seconds of trace time
    double window = 45.0;        // analysis window, seconds of trace time
    uint64_t seed = 0;
    uint32_t exact_vc_cutoff = 30; // exact vertex cover up to this many vertices
    uint32_t threads = 1;

    std::vector<std::string> overridden; // keys changed from the defaults

    void validate() const {
        auto positive = [](double v, const char* key) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ConfigError(std::string("config key `") + key + "` must be positive");
        };
        positive(pkt_timeout, "pkt_timeout");
        positive(eps, "eps");
        positive(judge_interval, "judge_interval");
        positive(window, "window");
        if (flow_line < 1) throw ConfigError("config key `flow_line` must be >= 1");
        if (agg_line < 1) throw ConfigError("config key `agg_line` must be >= 1");
        if (min_points < 1) throw ConfigError("config key `min_points` must be >= 1");
        if (kmeans_k < 1) throw ConfigError("config key `kmeans_k` must be >= 1");
        if (!(threshold >= 0.0) || !std::isfinite(threshold))
            throw ConfigError("config key `threshold` must be non-negative");
        const std::pair<double, const char*> weights[] = {
            {alpha, "alpha"}, {beta, "beta"}, {gamma, "gamma"}};
        for (auto [v, key] : weights)
            if (!std::isfinite(v))
                throw ConfigError(std::string("config key `") + key + "` must be finite");
        if (exact_vc_cutoff > 64)
            throw ConfigError("config key `exact_vc_cutoff` must be <= 64");
        if (threads < 1) throw ConfigError("config key `threads` must be >= 1");
    }

    FlowTableConfig flow_table_config() const { return {judge_interval, pkt_timeout, flow_line}; }

    DetectParams detect_params() const {
        DetectParams p;
        p.component_dbscan = {eps, min_points};
        p.edge_dbscan = {eps, min_points};
        p.kmeans_k = kmeans_k;
        p.seed = seed;
        p.exact_vc_cutoff = exact_vc_cutoff;
        p.weights = {alpha, beta, gamma, threshold};
        p.threads = threads;
        return p;
    }

    // applies one key=value pair; unknown keys are errors so typos cannot
    // silently fall back to defaults
    void set(const std::string& key, const std::string& value) {
        auto as_f64 = [&]() {
            double v = 0.0;
            auto r = std::from_chars(value.data(), value.data() + value.size(), v);
            if (r.ec != std::errc() || r.ptr != value.data() + value.size())
                throw ConfigError("config key `" + key + "`: bad number `" + value + "`");
            return v;
        };
        auto as_u64 = [&]() {
            uint64_t v = 0;
            auto r = std::from_chars(value.data(), value.data() + value.size(), v);
            if (r.ec != std::errc() || r.ptr != value.data() + value.size())
                throw ConfigError("config key `" + key + "`: bad integer `" + value + "`");
            return v;
        };
        if (key == "pkt_timeout") pkt_timeout = as_f64();
        else if (key == "flow_line") flow_line = uint32_t(as_u64());
        else if (key == "agg_line") agg_line = uint32_t(as_u64());
        else if (key == "eps") eps = as_f64();
        else if (key == "min_points") min_points = uint32_t(as_u64());
        else if (key == "kmeans_k") kmeans_k = uint32_t(as_u64());
        else if (key == "threshold") threshold = as_f64();
        else if (key == "alpha") alpha = as_f64();
        else if (key == "beta") beta = as_f64();
        else if (key == "gamma") gamma = as_f64();
        else if (key == "judge_interval") judge_interval = as_f64();
        else if (key == "window") window = as_f64();
        else if (key == "seed") seed = as_u64();
        else if (key == "exact_vc_cutoff") exact_vc_cutoff = uint32_t(as_u64());
        else if (key == "threads") threads = uint32_t(as_u64());
        else throw ConfigError("unknown config key `" + key + "`");
        overridden.push_back(key);
    }
};

// Flat key=value file, `#` starts a comment.
inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    Config cfg;
    std::string line;
    uint64_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        size_t begin = line.find_first_not_of(" \t");
        if (begin == std::string::npos) continue;
        size_t end = line.find_last_not_of(" \t");
        line = line.substr(begin, end - begin + 1);
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(row) + ": expected key=value");
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t");
            if (b == std::string::npos) return std::string();
            size_t e = s.find_last_not_of(" \t");
            return s.substr(b, e - b + 1);
        };
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

} // namespace fv
