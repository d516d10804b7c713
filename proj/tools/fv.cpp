// fv: flow interaction graph analyzer.
//
// Subcommands: detect, graph, graph diff, entropy, synth. See README.md.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fv/fv.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;

struct DetectOptions {
    std::string input;
    std::string format = "csv";
    std::string config_path;
    std::string out_path;
    std::string report_path;
    std::string summary_path;
    std::vector<std::string> set_pairs;
};

fv::Config assemble_config(const std::string& config_path,
                           const std::vector<std::string>& set_pairs) {
    fv::Config cfg;
    if (!config_path.empty()) cfg = fv::load_config(config_path);
    for (const auto& kv : set_pairs) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw fv::ConfigError("--set expects key=value, got `" + kv + "`");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

template <typename Sink>
fv::IngestCounters read_trace(const std::string& path, const std::string& format, Sink&& sink) {
    if (format == "pcap") return fv::read_pcap(path, sink);
    if (format == "csv") return fv::read_csv(path, sink);
    throw fv::ConfigError("unknown --format `" + format + "`, expected pcap or csv");
}

std::string vertex_label(const fv::InteractionGraph& g, int64_t v) {
    return v < 0 ? std::string() : g.vertices[size_t(v)].label();
}

ordered_json config_json(const fv::Config& cfg) {
    ordered_json j;
    j["pkt_timeout"] = cfg.pkt_timeout;
    j["flow_line"] = cfg.flow_line;
    j["agg_line"] = cfg.agg_line;
    j["eps"] = cfg.eps;
    j["min_points"] = cfg.min_points;
    j["kmeans_k"] = cfg.kmeans_k;
    j["threshold"] = cfg.threshold;
    j["alpha"] = cfg.alpha;
    j["beta"] = cfg.beta;
    j["gamma"] = cfg.gamma;
    j["judge_interval"] = cfg.judge_interval;
    j["window"] = cfg.window;
    j["seed"] = cfg.seed;
    j["exact_vc_cutoff"] = cfg.exact_vc_cutoff;
    j["threads"] = cfg.threads;
    j["overridden"] = cfg.overridden;
    return j;
}

void write_verdicts_jsonl(std::ostream& out, const fv::WindowOutput& w) {
    const fv::InteractionGraph& g = w.graph;
    for (const auto& v : w.verdicts) {
        ordered_json j;
        j["edge_id"] = v.edge.index;
        j["kind"] = v.edge.kind == fv::EdgeKind::Short ? "short" : "long";
        j["src"] = g.vertices[g.edge_src(v.edge)].label();
        j["dst"] = g.vertices[g.edge_dst(v.edge)].label();
        j["flow_count"] = g.edge_flows(v.edge);
        // -inf (filtered by the component stage) serializes as null
        j["loss"] = v.loss;
        j["loss_center"] = v.loss_center;
        j["loss_cluster"] = v.loss_cluster;
        j["loss_count"] = v.loss_count;
        j["malicious"] = v.malicious;
        j["vertex"] = v.vertex < 0 ? ordered_json(nullptr) : ordered_json(vertex_label(g, v.vertex));
        j["window"] = w.index;
        out << j.dump() << '\n';
    }
}

int cmd_detect(const DetectOptions& opt) {
    fv::Config cfg = assemble_config(opt.config_path, opt.set_pairs);

    std::ofstream out_file;
    std::ostream* out = &std::cout;
    if (!opt.out_path.empty()) {
        out_file.open(opt.out_path, std::ios::binary);
        if (!out_file) throw fv::IoError("cannot write output: " + opt.out_path);
        out = &out_file;
    }
    std::ofstream summary;
    if (!opt.summary_path.empty()) {
        summary.open(opt.summary_path, std::ios::binary);
        if (!summary) throw fv::IoError("cannot write summary: " + opt.summary_path);
        summary << "window,packets,vertices,short_edges,long_edges,components,"
                   "abnormal_components,verdicts,malicious\n";
    }

    ordered_json report;
    report["config"] = config_json(cfg);
    report["windows"] = ordered_json::array();
    uint64_t total_verdicts = 0, total_malicious = 0;

    auto wall0 = std::chrono::steady_clock::now();
    fv::WindowedPipeline pipe(cfg, [&](fv::WindowOutput& w) {
        write_verdicts_jsonl(*out, w);
        if (summary.is_open()) {
            summary << w.index << ',' << w.packets << ',' << w.graph.vertices.size() << ','
                    << w.graph.short_edges.size() << ',' << w.graph.long_edges.size() << ','
                    << w.info.components << ',' << w.info.abnormal_components << ','
                    << w.verdicts.size() << ',' << w.malicious_count() << '\n';
        }
        ordered_json wj;
        wj["index"] = w.index;
        wj["packets"] = w.packets;
        wj["vertices"] = w.graph.vertices.size();
        wj["short_edges"] = w.graph.short_edges.size();
        wj["long_edges"] = w.graph.long_edges.size();
        wj["components"] = w.info.components;
        wj["abnormal_components"] = w.info.abnormal_components;
        wj["preclusters"] = w.info.preclusters;
        wj["critical_vertices"] = w.info.critical_vertices;
        wj["verdicts"] = w.verdicts.size();
        wj["malicious"] = w.malicious_count();
        wj["timings"] = ordered_json{{"construct", w.construct_seconds},
                                     {"preprocess", w.info.preprocess_seconds},
                                     {"detect", w.info.detect_seconds},
                                     {"wall", w.wall_seconds}};
        report["windows"].push_back(std::move(wj));
        total_verdicts += w.verdicts.size();
        total_malicious += w.malicious_count();
    });
    fv::IngestCounters counters =
        read_trace(opt.input, opt.format, [&](const fv::PacketRecord& p) { pipe.feed(p); });
    pipe.finish();
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

    report["totals"] =
        ordered_json{{"packets", pipe.total_packets()},
                     {"skipped_frames", counters.skipped},
                     {"verdicts", total_verdicts},
                     {"malicious", total_malicious},
                     {"wall_seconds", wall},
                     {"throughput_pps", wall > 0 ? double(pipe.total_packets()) / wall : 0.0}};
    report["peak_memory_bytes"] = fv::peak_memory_bytes();
    if (!opt.report_path.empty()) {
        std::ofstream rf(opt.report_path, std::ios::binary);
        if (!rf) throw fv::IoError("cannot write report: " + opt.report_path);
        rf << report.dump(2) << '\n';
    }
    FV_INFO("%llu packets, %llu verdicts, %llu malicious",
            (unsigned long long)pipe.total_packets(), (unsigned long long)total_verdicts,
            (unsigned long long)total_malicious);
    return kExitOk;
}

int cmd_graph_build(const DetectOptions& opt) {
    fv::Config cfg = assemble_config(opt.config_path, opt.set_pairs);
    if (opt.out_path.empty()) throw fv::ConfigError("graph: --out is required");
    std::vector<fv::InteractionGraph> graphs;
    {
        fv::FlowTable table(cfg.flow_table_config());
        std::vector<fv::FlowRecord> shorts, longs;
        bool started = false;
        double window_end = 0.0, time_now = 0.0, last_check = 0.0;
        uint64_t in_window = 0;
        auto close = [&] {
            if (in_window == 0) return;
            table.flush(shorts, longs);
            graphs.push_back(fv::build_graph(shorts, longs, cfg.agg_line));
            shorts.clear();
            longs.clear();
            table = fv::FlowTable(cfg.flow_table_config());
            in_window = 0;
        };
        read_trace(opt.input, opt.format, [&](const fv::PacketRecord& p) {
            if (!started) {
                started = true;
                window_end = p.timestamp + cfg.window;
                time_now = last_check = p.timestamp;
            }
            while (p.timestamp >= window_end) {
                close();
                window_end += cfg.window;
            }
            table.insert_packet(p);
            ++in_window;
            if (time_now - last_check > cfg.judge_interval) {
                table.sweep(time_now, shorts, longs);
                last_check = time_now;
            }
            time_now = p.timestamp;
        });
        close();
    }
    if (graphs.empty()) graphs.emplace_back(); // empty trace still exports a graph
    for (size_t i = 0; i < graphs.size(); ++i) {
        std::string path = opt.out_path;
        if (i > 0) path += ".w" + std::to_string(i);
        fv::export_graph(graphs[i], path);
    }
    FV_INFO("exported %zu window graph(s) to %s", graphs.size(), opt.out_path.c_str());
    return kExitOk;
}

int cmd_graph_diff(const std::string& a, const std::string& b) {
    fv::InteractionGraph ga = fv::import_graph(a);
    fv::InteractionGraph gb = fv::import_graph(b);
    if (fv::graph_equal(ga, gb)) {
        std::puts("graphs are structurally equal");
        return kExitOk;
    }
    std::printf("graphs differ: %zu/%zu vertices, %zu/%zu short edges, %zu/%zu long edges\n",
                ga.vertices.size(), gb.vertices.size(), ga.short_edges.size(),
                gb.short_edges.size(), ga.long_edges.size(), gb.long_edges.size());
    return 1;
}

struct EntropyOptions {
    fv::DtmcParams prm;
    bool no_region_check = false;
    bool check_dpi = false;
    bool integrate = false;
    uint32_t grid = 0;
    uint32_t int_grid = 128;
    uint64_t mc_flows = 0;
    uint64_t seed = 1;
    std::string out_path;
};

// calibration presets standing in for the three per-packet feature chains
struct Preset {
    const char* name;
    uint32_t s, e_count, k_thresh;
    double c_agg;
};
constexpr Preset kPresets[] = {
    {"packet_length", 16, 64, 15, 2.0},
    {"time_interval", 32, 96, 15, 2.0},
    {"protocol_type", 4, 12, 15, 2.0},
};

int cmd_entropy(const EntropyOptions& opt) {
    fv::DtmcParams prm = opt.prm;
    try {
        prm.validate(!opt.no_region_check);
    } catch (const fv::RecordingDomainError& e) {
        throw fv::ConfigError(e.what());
    }

    std::ofstream out_file;
    std::ostream* out = &std::cout;
    if (!opt.out_path.empty()) {
        out_file.open(opt.out_path, std::ios::binary);
        if (!out_file) throw fv::IoError("cannot write output: " + opt.out_path);
        out = &out_file;
    }

    if (opt.check_dpi) {
        // information preserved by the graph never exceeds the idealized bound
        uint32_t bad = 0;
        double min_gap = 1e300, max_gap = -1e300;
        for (const Preset& ps : kPresets) {
            fv::DtmcParams base{ps.s, ps.e_count, 0.5, 0.7, ps.k_thresh, ps.c_agg};
            for (int i = 0; i < 33; ++i) {
                for (int j = 0; j < 17; ++j) {
                    base.p = 0.1 + 0.025 * i;
                    base.q = 0.5 + 0.025 * j;
                    double gap = fv::mode_ideal(base).h - fv::mode_graph(base).h;
                    min_gap = std::min(min_gap, gap);
                    max_gap = std::max(max_gap, gap);
                    if (!(gap >= -1e-9)) ++bad;
                }
            }
        }
        std::printf("dpi check: %u violations over %d grid points, gap range [%g, %g]\n", bad,
                    3 * 33 * 17, min_gap, max_gap);
        return bad == 0 ? kExitOk : 1;
    }

    if (opt.integrate) {
        *out << "preset,d_ideal,d_graph,d_samp,d_eve,graph_is_max\n";
        bool all_max = true;
        for (const Preset& ps : kPresets) {
            fv::DtmcParams base{ps.s, ps.e_count, 0.5, 0.7, ps.k_thresh, ps.c_agg};
            double di = fv::integrate_density(fv::RecordingMode::Ideal, base, opt.int_grid);
            double dg = fv::integrate_density(fv::RecordingMode::Graph, base, opt.int_grid);
            double ds = fv::integrate_density(fv::RecordingMode::Sampling, base, opt.int_grid);
            double de = fv::integrate_density(fv::RecordingMode::Event, base, opt.int_grid);
            bool isMax = dg > di && dg > ds && dg > de;
            all_max = all_max && isMax;
            char buf[256];
            std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%d\n", ps.name, di, dg, ds,
                          de, isMax ? 1 : 0);
            *out << buf;
        }
        return all_max ? kExitOk : 1;
    }

    if (opt.grid > 0) {
        *out << "p,q,h_ideal,h_hv,h_samp,h_eve,l_ideal,l_hv,l_samp,l_eve,"
                "d_ideal,d_hv,d_samp,d_eve\n";
        for (uint32_t i = 0; i <= opt.grid; ++i) {
            for (uint32_t j = 0; j <= opt.grid; ++j) {
                fv::DtmcParams g = prm;
                g.p = fv::kRegionPLo + (fv::kRegionPHi - fv::kRegionPLo) * i / opt.grid;
                g.q = fv::kRegionQLo + (fv::kRegionQHi - fv::kRegionQLo) * j / opt.grid;
                auto mi = fv::mode_ideal(g), mg = fv::mode_graph(g), ms = fv::mode_sampling(g),
                     me = fv::mode_event(g);
                char buf[512];
                std::snprintf(buf, sizeof(buf),
                              "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,"
                              "%.6f\n",
                              g.p, g.q, mi.h, mg.h, ms.h, me.h, mi.l, mg.l, ms.l, me.l, mi.d,
                              mg.d, ms.d, me.d);
                *out << buf;
            }
        }
        return kExitOk;
    }

    auto mi = fv::mode_ideal(prm), mg = fv::mode_graph(prm), ms = fv::mode_sampling(prm),
         me = fv::mode_event(prm);
    std::printf("mode       h(nat)      l(units)    d(nat/unit)\n");
    std::printf("ideal      %-11.6f %-11.6f %.6f\n", mi.h, mi.l, mi.d);
    std::printf("graph      %-11.6f %-11.6f %.6f\n", mg.h, mg.l, mg.d);
    std::printf("sampling   %-11.6f %-11.6f %.6f\n", ms.h, ms.l, ms.d);
    std::printf("event      %-11.6f %-11.6f %.6f\n", me.h, me.l, me.d);
    if (opt.mc_flows > 0) {
        auto mc = fv::monte_carlo(prm, opt.mc_flows, opt.seed);
        std::printf("monte carlo (%llu flows, seed %llu):\n", (unsigned long long)opt.mc_flows,
                    (unsigned long long)opt.seed);
        std::printf("ideal      %-11.6f %-11.6f %.6f\n", mc.ideal.h, mc.ideal.l, mc.ideal.d);
        std::printf("graph      %-11.6f %-11.6f %.6f\n", mc.graph.h, mc.graph.l, mc.graph.d);
        std::printf("sampling   %-11.6f %-11.6f %.6f\n", mc.sampling.h, mc.sampling.l,
                    mc.sampling.d);
        std::printf("event      %-11.6f %-11.6f %.6f\n", mc.event.h, mc.event.l, mc.event.d);
    }
    return kExitOk;
}

int cmd_synth(const std::string& scenario, uint64_t seed, const std::string& out_path,
              const std::string& gt_path) {
    if (out_path.empty()) throw fv::ConfigError("synth: --out is required");
    fv::synth::Trace t;
    try {
        t = fv::synth::gen_synthetic(scenario, seed);
    } catch (const std::invalid_argument& e) {
        throw fv::ConfigError(e.what());
    }
    fv::write_csv(out_path, t.packets);
    std::string gt = gt_path.empty() ? out_path + ".gt.csv" : gt_path;
    fv::write_sidecar(gt, t.truth);
    FV_INFO("wrote %zu packets, %zu truth rows", t.packets.size(), t.truth.size());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"flow interaction graph traffic analyzer"};
    app.require_subcommand(1);

    DetectOptions dopt;
    auto* detect = app.add_subcommand("detect", "detect malicious traffic in a trace");
    detect->add_option("--in", dopt.input, "input trace")->required();
    detect->add_option("--format", dopt.format, "trace format: csv or pcap");
    detect->add_option("--config", dopt.config_path, "key=value config file");
    detect->add_option("--out", dopt.out_path, "verdict JSONL output (default stdout)");
    detect->add_option("--report", dopt.report_path, "run report JSON path");
    detect->add_option("--summary", dopt.summary_path, "per-window summary CSV path");
    detect->add_option("--set", dopt.set_pairs, "override one config key, key=value");
    uint64_t seed_flag = 0;
    double window_flag = 0.0;
    uint32_t threads_flag = 0;
    detect->add_option("--seed", seed_flag, "override the seed");
    detect->add_option("--window", window_flag, "override the window length, seconds");
    detect->add_option("--threads", threads_flag, "worker threads for detection");

    DetectOptions gopt;
    auto* graph = app.add_subcommand("graph", "build and export the interaction graph");
    auto* gdiff = graph->add_subcommand("diff", "compare two exported graphs");
    std::string diff_a, diff_b;
    gdiff->add_option("a", diff_a, "first graph file")->required();
    gdiff->add_option("b", diff_b, "second graph file")->required();
    graph->add_option("--in", gopt.input, "input trace");
    graph->add_option("--format", gopt.format, "trace format: csv or pcap");
    graph->add_option("--config", gopt.config_path, "key=value config file");
    graph->add_option("--out", gopt.out_path, "graph JSON output");
    graph->add_option("--set", gopt.set_pairs, "override one config key, key=value");

    EntropyOptions eopt;
    auto* entropy = app.add_subcommand("entropy", "flow recording entropy model");
    entropy->add_option("--s", eopt.prm.s, "DTMC states");
    entropy->add_option("--edges", eopt.prm.e_count, "state diagram edges");
    entropy->add_option("--p", eopt.prm.p, "binomial stationary parameter");
    entropy->add_option("--q", eopt.prm.q, "geometric flow length parameter");
    entropy->add_option("--K", eopt.prm.k_thresh, "short/long threshold");
    entropy->add_option("--C", eopt.prm.c_agg, "flows per aggregated edge");
    entropy->add_flag("--no-region-check", eopt.no_region_check, "allow (p,q) outside the region");
    entropy->add_flag("--check-dpi", eopt.check_dpi, "assert ideal >= graph over the region");
    entropy->add_flag("--integrate", eopt.integrate, "density integrals for the presets");
    entropy->add_option("--grid", eopt.grid, "emit a CSV sweep with this many steps per axis");
    entropy->add_option("--int-grid", eopt.int_grid, "integration grid steps");
    entropy->add_option("--mc", eopt.mc_flows, "cross-check with this many Monte Carlo flows");
    entropy->add_option("--seed", eopt.seed, "Monte Carlo seed");
    entropy->add_option("--out", eopt.out_path, "CSV output (default stdout)");

    std::string synth_scenario, synth_out, synth_gt;
    uint64_t synth_seed = 0;
    bool synth_list = false;
    auto* synth = app.add_subcommand("synth", "generate a synthetic labeled trace");
    synth->add_option("scenario", synth_scenario, "scenario name");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out", synth_out, "trace CSV path");
    synth->add_option("--gt", synth_gt, "ground truth sidecar path (default <out>.gt.csv)");
    synth->add_flag("--list", synth_list, "list scenario names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (detect->parsed()) {
            if (seed_flag != 0) dopt.set_pairs.push_back("seed=" + std::to_string(seed_flag));
            if (window_flag != 0.0)
                dopt.set_pairs.push_back("window=" + std::to_string(window_flag));
            if (threads_flag != 0)
                dopt.set_pairs.push_back("threads=" + std::to_string(threads_flag));
            return cmd_detect(dopt);
        }
        if (graph->parsed()) {
            if (gdiff->parsed()) return cmd_graph_diff(diff_a, diff_b);
            if (gopt.input.empty()) throw fv::ConfigError("graph: --in is required");
            return cmd_graph_build(gopt);
        }
        if (entropy->parsed()) return cmd_entropy(eopt);
        if (synth->parsed()) {
            if (synth_list) {
                for (const auto& n : fv::synth::scenario_names()) std::puts(n.c_str());
                return kExitOk;
            }
            if (synth_scenario.empty()) throw fv::ConfigError("synth: scenario name required");
            return cmd_synth(synth_scenario, synth_seed, synth_out, synth_gt);
        }
    } catch (const fv::ConfigError& e) {
        FV_ERROR("%s", e.what());
        return kExitConfig;
    } catch (const fv::IoError& e) {
        FV_ERROR("%s", e.what());
        return kExitInput;
    } catch (const fv::GraphIoError& e) {
        FV_ERROR("%s", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        FV_ERROR("%s", e.what());
        return kExitInput;
    }
    return kExitOk;
}
