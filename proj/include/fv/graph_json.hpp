#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "fv/graph.hpp"

namespace fv {

struct GraphIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kGraphFormatVersion = 1;

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json key_to_json(const FlowKey& k) {
    return ordered_json::array({k.src_addr.str(), k.dst_addr.str(), k.src_port, k.dst_port});
}

inline FlowKey key_from_json(const nlohmann::json& j) {
    FlowKey k;
    k.src_addr = IpAddr::parse(j.at(0).get<std::string>());
    k.dst_addr = IpAddr::parse(j.at(1).get<std::string>());
    k.src_port = j.at(2).get<uint16_t>();
    k.dst_port = j.at(3).get<uint16_t>();
    return k;
}

inline ordered_json hist_to_json(const Histogram& h) {
    ordered_json bins = ordered_json::array();
    for (const auto& [code, count] : h.bins) bins.push_back(ordered_json::array({code, count}));
    return ordered_json{{"width", h.bucket_width}, {"bins", std::move(bins)}};
}

inline Histogram hist_from_json(const nlohmann::json& j) {
    Histogram h;
    h.bucket_width = j.at("width").get<double>();
    for (const auto& b : j.at("bins")) h.bins[b.at(0).get<int64_t>()] = b.at(1).get<uint64_t>();
    return h;
}

} // namespace detail

inline std::string export_graph_json(const InteractionGraph& g) {
    using detail::ordered_json;
    ordered_json j;
    j["format"] = "fv-graph";
    j["version"] = kGraphFormatVersion;
    ordered_json verts = ordered_json::array();
    for (size_t i = 0; i < g.vertices.size(); ++i) {
        const Vertex& v = g.vertices[i];
        ordered_json addrs = ordered_json::array();
        for (const auto& a : v.addrs) addrs.push_back(a.str());
        verts.push_back(ordered_json{{"id", i},
                                     {"kind", v.kind == VertexKind::Single ? "single" : "group"},
                                     {"addrs", std::move(addrs)}});
    }
    j["vertices"] = std::move(verts);

    ordered_json shorts = ordered_json::array();
    for (const auto& e : g.short_edges) {
        ordered_json rep = ordered_json::array();
        for (const auto& f : e.representative_features)
            rep.push_back(ordered_json::array({f.protocol_mask, f.length, f.interval}));
        ordered_json flows = ordered_json::array();
        for (const auto& t : e.member_tuples) flows.push_back(detail::key_to_json(t));
        shorts.push_back(ordered_json{{"src", e.src_vertex},
                                      {"dst", e.dst_vertex},
                                      {"agg", agg_name(e.agg_kind)},
                                      {"flow_count", e.flow_count},
                                      {"proto_mask", e.protocol_mask},
                                      {"first_ts", e.first_ts},
                                      {"last_ts", e.last_ts},
                                      {"rep", std::move(rep)},
                                      {"flows", std::move(flows)}});
    }
    j["short_edges"] = std::move(shorts);

    ordered_json longs = ordered_json::array();
    for (const auto& e : g.long_edges) {
        longs.push_back(ordered_json{{"src", e.src_vertex},
                                     {"dst", e.dst_vertex},
                                     {"key", detail::key_to_json(e.key)},
                                     {"fct", e.fct},
                                     {"pkt_count", e.pkt_count},
                                     {"first_ts", e.first_ts},
                                     {"last_ts", e.last_ts},
                                     {"len_hist", detail::hist_to_json(e.len_hist)},
                                     {"interval_hist", detail::hist_to_json(e.interval_hist)},
                                     {"proto_hist", detail::hist_to_json(e.proto_hist)}});
    }
    j["long_edges"] = std::move(longs);
    return j.dump(2) + "\n";
}

inline void export_graph(const InteractionGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw GraphIoError("cannot write graph file: " + path);
    auto s = export_graph_json(g);
    out.write(s.data(), std::streamsize(s.size()));
    if (!out) throw GraphIoError("short write: " + path);
}

inline InteractionGraph import_graph_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw GraphIoError(std::string("corrupt graph file: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "fv-graph")
            throw GraphIoError("not a graph file");
        int version = j.at("version").get<int>();
        if (version != kGraphFormatVersion)
            throw GraphIoError("graph format version mismatch: got " + std::to_string(version) +
                               ", expected " + std::to_string(kGraphFormatVersion));
        InteractionGraph g;
        for (const auto& vj : j.at("vertices")) {
            Vertex v;
            v.kind = vj.at("kind").get<std::string>() == "group" ? VertexKind::Group
                                                                 : VertexKind::Single;
            for (const auto& a : vj.at("addrs")) v.addrs.push_back(IpAddr::parse(a.get<std::string>()));
            g.vertices.push_back(std::move(v));
            g.out_edges.emplace_back();
            g.in_edges.emplace_back();
        }
        auto check_vertex = [&](uint32_t v) {
            if (v >= g.vertices.size()) throw GraphIoError("edge endpoint out of range");
            return v;
        };
        for (const auto& ej : j.at("short_edges")) {
            ShortEdge e;
            e.src_vertex = check_vertex(ej.at("src").get<uint32_t>());
            e.dst_vertex = check_vertex(ej.at("dst").get<uint32_t>());
            std::string agg = ej.at("agg").get<std::string>();
            e.agg_kind = agg == "src"    ? AggKind::SrcAgg
                         : agg == "dst"  ? AggKind::DstAgg
                         : agg == "both" ? AggKind::BothAgg
                                         : AggKind::NoAgg;
            e.flow_count = ej.at("flow_count").get<uint64_t>();
            e.protocol_mask = ej.at("proto_mask").get<uint16_t>();
            e.first_ts = ej.at("first_ts").get<double>();
            e.last_ts = ej.at("last_ts").get<double>();
            for (const auto& f : ej.at("rep"))
                e.representative_features.push_back(PerPacketFeature{
                    f.at(0).get<uint16_t>(), f.at(1).get<uint32_t>(), f.at(2).get<double>()});
            for (const auto& t : ej.at("flows")) e.member_tuples.push_back(detail::key_from_json(t));
            uint32_t idx = uint32_t(g.short_edges.size());
            g.out_edges[e.src_vertex].push_back({EdgeKind::Short, idx});
            g.in_edges[e.dst_vertex].push_back({EdgeKind::Short, idx});
            g.short_edges.push_back(std::move(e));
        }
        for (const auto& ej : j.at("long_edges")) {
            LongEdge e;
            e.src_vertex = check_vertex(ej.at("src").get<uint32_t>());
            e.dst_vertex = check_vertex(ej.at("dst").get<uint32_t>());
            e.key = detail::key_from_json(ej.at("key"));
            e.fct = ej.at("fct").get<double>();
            e.pkt_count = ej.at("pkt_count").get<uint64_t>();
            e.first_ts = ej.at("first_ts").get<double>();
            e.last_ts = ej.at("last_ts").get<double>();
            e.len_hist = detail::hist_from_json(ej.at("len_hist"));
            e.interval_hist = detail::hist_from_json(ej.at("interval_hist"));
            e.proto_hist = detail::hist_from_json(ej.at("proto_hist"));
            uint32_t idx = uint32_t(g.long_edges.size());
            g.out_edges[e.src_vertex].push_back({EdgeKind::Long, idx});
            g.in_edges[e.dst_vertex].push_back({EdgeKind::Long, idx});
            g.long_edges.push_back(std::move(e));
        }
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw GraphIoError(std::string("corrupt graph file: ") + e.what());
    }
}

inline InteractionGraph import_graph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GraphIoError("cannot open graph file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return import_graph_json(text);
}

} // namespace fv
