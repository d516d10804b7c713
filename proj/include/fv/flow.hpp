#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "fv/net.hpp"

namespace fv {

// Directional 4-tuple. Portless protocols use port 0.
struct FlowKey {
    IpAddr src_addr;
    IpAddr dst_addr;
    uint16_t src_port = 0;
    uint16_t dst_port = 0;

    auto operator<=>(const FlowKey&) const = default;
};

inline uint64_t hash_key(const FlowKey& k) {
    uint64_t h = hash_addr(k.src_addr);
    h = hash_mix(h ^ hash_addr(k.dst_addr));
    h = hash_mix(h ^ (uint64_t(k.src_port) << 16) ^ k.dst_port);
    return h;
}

enum class FlowClass : uint8_t { Short, Long };

struct FlowRecord {
    FlowKey key;
    std::vector<PerPacketFeature> features;
    double first_ts = 0.0;
    double last_ts = 0.0;
    L4Proto l4_protocol = L4Proto::OTHER;

    // OR of the per-packet protocol masks; the aggregation grouping key
    uint16_t flow_mask() const {
        uint16_t m = 0;
        for (const auto& f : features) m |= f.protocol_mask;
        return m;
    }

    uint64_t byte_count() const {
        uint64_t b = 0;
        for (const auto& f : features) b += f.length;
        return b;
    }
};

struct FlowTableConfig {
    double judge_interval = 1.0;
    double pkt_timeout = 10.0;
    uint32_t flow_line = 15;

    void validate() const {
        if (judge_interval <= 0) throw std::invalid_argument("judge_interval must be > 0");
        if (pkt_timeout <= 0) throw std::invalid_argument("pkt_timeout must be > 0");
        if (flow_line == 0) throw std::invalid_argument("flow_line must be > 0");
    }
};

inline FlowClass classify(const FlowRecord& flow, uint32_t flow_line) {
    return flow.features.size() > flow_line ? FlowClass::Long : FlowClass::Short;
}

// Keyed flow accumulator. Completion is judged against trace time only: an
// entry whose last packet is older than pkt_timeout at sweep time is evicted
// and classified. A key reused after eviction starts a fresh flow.
class FlowTable {
public:
    explicit FlowTable(FlowTableConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

    const FlowTableConfig& config() const { return cfg_; }
    double clock() const { return clock_; }
    size_t active_flows() const { return table_.size(); }
    uint64_t inserted_packets() const { return inserted_; }

    void insert_packet(const PacketRecord& pkt) {
        FlowKey key{pkt.src_addr, pkt.dst_addr, pkt.src_port, pkt.dst_port};
        auto [it, fresh] = table_.try_emplace(key);
        Entry& e = it->second;
        if (fresh) {
            e.flow.key = key;
            e.flow.first_ts = pkt.timestamp;
            e.flow.l4_protocol = pkt.l4_protocol;
            e.flow.features.push_back(featurize(pkt, nullptr));
        } else {
            e.flow.features.push_back(featurize(pkt, &e.flow.last_ts));
        }
        e.flow.last_ts = std::max(e.flow.last_ts, pkt.timestamp);
        clock_ = std::max(clock_, pkt.timestamp);
        ++inserted_;
    }

    // Evicts every flow whose last packet arrived more than pkt_timeout before
    // time_now. Emission order is (first_ts, key) for reproducibility.
    void sweep(double time_now, std::vector<FlowRecord>& short_out,
               std::vector<FlowRecord>& long_out) {
        std::vector<FlowRecord> evicted;
        for (auto it = table_.begin(); it != table_.end();) {
            if (time_now - it->second.flow.last_ts > cfg_.pkt_timeout) {
                evicted.push_back(std::move(it->second.flow));
                it = table_.erase(it);
            } else {
                ++it;
            }
        }
        emit_sorted(std::move(evicted), short_out, long_out);
    }

    // Drains everything that is still active, e.g. at end of trace or window.
    void flush(std::vector<FlowRecord>& short_out, std::vector<FlowRecord>& long_out) {
        std::vector<FlowRecord> evicted;
        evicted.reserve(table_.size());
        for (auto& [key, e] : table_) evicted.push_back(std::move(e.flow));
        table_.clear();
        emit_sorted(std::move(evicted), short_out, long_out);
    }

private:
    struct Entry {
        FlowRecord flow;
    };

    struct KeyHash {
        size_t operator()(const FlowKey& k) const { return size_t(hash_key(k)); }
    };

    void emit_sorted(std::vector<FlowRecord>&& evicted, std::vector<FlowRecord>& short_out,
                     std::vector<FlowRecord>& long_out) {
        std::sort(evicted.begin(), evicted.end(), [](const FlowRecord& a, const FlowRecord& b) {
            if (a.first_ts != b.first_ts) return a.first_ts < b.first_ts;
            return a.key < b.key;
        });
        for (auto& f : evicted) {
            if (classify(f, cfg_.flow_line) == FlowClass::Long)
                long_out.push_back(std::move(f));
            else
                short_out.push_back(std::move(f));
        }
    }

    FlowTableConfig cfg_;
    std::unordered_map<FlowKey, Entry, KeyHash> table_;
    double clock_ = 0.0;
    uint64_t inserted_ = 0;
};

// Replays a packet sequence with the sweep schedule of the classification
// algorithm: completion checks run against the previous packet's timestamp
// whenever it is more than judge_interval past the last check.
template <typename PacketRange>
void run_flow_classification(const PacketRange& packets, const FlowTableConfig& cfg,
                             std::vector<FlowRecord>& short_out,
                             std::vector<FlowRecord>& long_out) {
    FlowTable table(cfg);
    bool first = true;
    double time_now = 0.0, last_check = 0.0;
    for (const PacketRecord& pkt : packets) {
        if (first) {
            time_now = last_check = pkt.timestamp;
            first = false;
        }
        table.insert_packet(pkt);
        if (time_now - last_check > cfg.judge_interval) {
            table.sweep(time_now, short_out, long_out);
            last_check = time_now;
        }
        time_now = pkt.timestamp;
    }
    table.flush(short_out, long_out);
}

} // namespace fv

template <>
struct std::hash<fv::FlowKey> {
    size_t operator()(const fv::FlowKey& k) const { return size_t(fv::hash_key(k)); }
};
