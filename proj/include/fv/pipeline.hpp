#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "fv/config.hpp"
#include "fv/detect.hpp"
#include "fv/flow.hpp"
#include "fv/graph.hpp"

namespace fv {

struct WindowOutput {
    uint32_t index = 0;
    uint64_t packets = 0;
    InteractionGraph graph;
    std::vector<DetectionVerdict> verdicts;
    DetectInfo info;
    double construct_seconds = 0.0; // ingest, classification, aggregation, fitting
    double wall_seconds = 0.0;

    uint64_t malicious_count() const {
        uint64_t n = 0;
        for (const auto& v : verdicts) n += v.malicious ? 1 : 0;
        return n;
    }
};

// Windowed driver: packets stream in trace-time order, each window gets a
// fresh flow table and graph, completed windows are handed to the callback.
class WindowedPipeline {
public:
    using WindowCallback = std::function<void(WindowOutput&)>;

    WindowedPipeline(const Config& cfg, WindowCallback cb)
        : cfg_(cfg), callback_(std::move(cb)), table_(cfg.flow_table_config()) {}

    void feed(const PacketRecord& pkt) {
        if (!started_) {
            start_trace(pkt.timestamp);
        }
        while (pkt.timestamp >= window_end_) close_window(true);
        if (window_packets_ == 0) window_started_at_ = std::chrono::steady_clock::now();
        table_.insert_packet(pkt);
        ++window_packets_;
        // completion checks follow the previous packet's clock
        if (time_now_ - last_check_ > cfg_.judge_interval) {
            table_.sweep(time_now_, short_flows_, long_flows_);
            last_check_ = time_now_;
        }
        time_now_ = pkt.timestamp;
    }

    // drains the final window
    void finish() {
        if (started_ && window_packets_ > 0) close_window(false);
        started_ = false;
    }

    uint64_t total_packets() const { return total_packets_; }

private:
    void start_trace(double t0) {
        started_ = true;
        trace_start_ = t0;
        window_end_ = t0 + cfg_.window;
        window_index_ = 0;
        time_now_ = last_check_ = t0;
    }

    void close_window(bool reopen) {
        if (window_packets_ > 0) {
            WindowOutput out;
            out.index = window_index_;
            out.packets = window_packets_;
            table_.flush(short_flows_, long_flows_);
            out.graph = build_graph(short_flows_, long_flows_, cfg_.agg_line);
            out.verdicts = detect(out.graph, cfg_.detect_params(), &out.info);
            auto now = std::chrono::steady_clock::now();
            out.wall_seconds = std::chrono::duration<double>(now - window_started_at_).count();
            out.construct_seconds =
                out.wall_seconds - out.info.preprocess_seconds - out.info.detect_seconds;
            total_packets_ += window_packets_;
            callback_(out);
        }
        short_flows_.clear();
        long_flows_.clear();
        window_packets_ = 0;
        table_ = FlowTable(cfg_.flow_table_config());
        if (reopen) {
            ++window_index_;
            window_end_ += cfg_.window;
            last_check_ = window_end_ - cfg_.window;
            time_now_ = last_check_;
        }
    }

    Config cfg_;
    WindowCallback callback_;
    FlowTable table_;
    std::vector<FlowRecord> short_flows_, long_flows_;
    bool started_ = false;
    double trace_start_ = 0.0;
    double window_end_ = 0.0;
    double time_now_ = 0.0;
    double last_check_ = 0.0;
    uint32_t window_index_ = 0;
    uint64_t window_packets_ = 0;
    uint64_t total_packets_ = 0;
    std::chrono::steady_clock::time_point window_started_at_{};
};

// peak resident set of this process in bytes (VmHWM), 0 when unavailable
inline uint64_t peak_memory_bytes() {
    std::ifstream in("/proc/self/status");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("VmHWM:", 0) == 0) {
            uint64_t kb = 0;
            for (char c : line)
                if (c >= '0' && c <= '9') kb = kb * 10 + uint64_t(c - '0');
            return kb * 1024;
        }
    }
    return 0;
}

} // namespace fv
