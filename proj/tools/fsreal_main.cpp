// fsreal: federation experiment front-end.
//
// Subcommands: simulate, serve, client, replay, report.
// Exit codes: 0 success, 1 config error, 2 verification failure, 3 runtime error.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "fsreal/config.hpp"
#include "fsreal/errors.hpp"
#include "fsreal/log.hpp"
#include "fsreal/metrics.hpp"
#include "fsreal/net_client.hpp"
#include "fsreal/net_server.hpp"
#include "fsreal/replay.hpp"
#include "fsreal/report.hpp"
#include "fsreal/sim.hpp"

namespace fs = std::filesystem;
using namespace fsreal;

namespace {

std::pair<std::string, uint16_t> split_endpoint(const std::string& endpoint) {
    const size_t colon = endpoint.rfind(':');
    if (colon == std::string::npos) {
        throw ConfigError("endpoint must be HOST:PORT, got '" + endpoint + "'");
    }
    const std::string host = endpoint.substr(0, colon);
    const int port = std::stoi(endpoint.substr(colon + 1));
    if (port < 0 || port > 65535) throw ConfigError("port out of range in '" + endpoint + "'");
    return {host, static_cast<uint16_t>(port)};
}

void append_csv_row(const fs::path& csv_path, const MetricsRow& row) {
    const bool fresh = !fs::exists(csv_path) || fs::file_size(csv_path) == 0;
    std::ofstream out(csv_path, std::ios::app);
    if (!out) throw IoError("cannot open '" + csv_path.string() + "' for writing");
    if (fresh) out << csv_header() << "\n";
    out << to_csv_row(row) << "\n";
}

MetricsRow make_row(const ExperimentConfig& cfg, uint64_t seed, const MetricsReport& report) {
    MetricsRow row;
    row.label = cfg.label;
    row.seed = seed;
    row.mode = to_string(cfg.sim.server.mode);
    row.algorithm = to_string(cfg.sim.algorithm);
    row.codec = to_string(cfg.sim.codec);
    switch (cfg.sim.device_dist.kind) {
        case DeviceDistribution::Kind::kHomo:
            row.distribution = "homo" + std::to_string(cfg.sim.device_dist.homo_index);
            break;
        case DeviceDistribution::Kind::kUniform:
            row.distribution = "uniform";
            break;
        case DeviceDistribution::Kind::kBetaBinomial: {
            std::ostringstream name;
            name << "beta_binomial_" << cfg.sim.device_dist.alpha << "_"
                 << cfg.sim.device_dist.beta;
            row.distribution = name.str();
            break;
        }
    }
    row.report = report;
    return row;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    const ExperimentConfig cfg = load_config(config_path);
    fs::create_directories(out_dir);
    const fs::path csv_path = fs::path(out_dir) / "metrics.csv";

    for (uint64_t seed : cfg.seeds) {
        SimConfig sim = cfg.sim;
        sim.seed = seed;
        const fs::path log_path =
            fs::path(out_dir) / (cfg.label + "_seed" + std::to_string(seed) + ".jsonl");
        std::ofstream log_out(log_path);
        if (!log_out) throw IoError("cannot open '" + log_path.string() + "' for writing");
        const SimResult result = run_simulation(sim, log_out);
        append_csv_row(csv_path, make_row(cfg, seed, result.report));
        std::cout << "seed " << seed << ": rounds=" << result.completed_rounds
                  << " acc=" << result.report.acc_mean_weighted
                  << " t_conv_h=" << result.report.t_conv_hours
                  << " log=" << log_path.string() << "\n";
    }
    std::cout << "metrics: " << csv_path.string() << "\n";
    return 0;
}

int cmd_serve(const std::string& config_path, const std::string& endpoint,
              const std::string& out_dir) {
    ExperimentConfig cfg = load_config(config_path);
    // Desk-scale distributed runs want a much tighter first deadline than
    // the simulation default; an explicit config value still wins.
    if (!cfg.timeout_explicit) cfg.sim.server.timeout_t0_s = 5.0;

    const auto [host, port] = split_endpoint(endpoint);
    ServeOptions opts;
    opts.host = host;
    opts.port = port;
    opts.latency_inject_s = cfg.latency_inject_s;

    fs::create_directories(out_dir);
    const fs::path log_path =
        fs::path(out_dir) / (cfg.label + "_serve_seed" + std::to_string(cfg.sim.seed) + ".jsonl");
    std::ofstream log_out(log_path);
    if (!log_out) throw IoError("cannot open '" + log_path.string() + "' for writing");

    const ServeResult result = run_server(cfg.sim, opts, log_out);
    append_csv_row(fs::path(out_dir) / "metrics.csv", make_row(cfg, cfg.sim.seed, result.report));
    std::cout << "serve done: rounds=" << result.completed_rounds
              << " acc=" << result.report.acc_mean_weighted << " log=" << log_path.string()
              << "\n";
    return 0;
}

int cmd_replay(const std::string& log_path) {
    const ReplayResult result = replay_event_log(log_path);
    if (result.ok) {
        std::cout << "replay ok: rounds=" << result.completed_rounds
                  << " digest=" << result.recomputed_final_digest << "\n";
        return 0;
    }
    std::cerr << "replay verification failed: " << result.message << "\n";
    return 2;
}

int cmd_report(const std::string& in_dir, const std::string& out_path) {
    const ReportSummary summary = aggregate_metrics_csvs(in_dir, out_path);
    std::cout << "report: " << out_path << " (" << summary.configurations
              << " configurations from " << summary.rows << " runs)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fsreal: heterogeneous-device federated learning testbed"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string endpoint;
    std::string id_file;
    std::string log_path;
    std::string in_dir;
    std::string report_out;

    auto* simulate = app.add_subcommand("simulate", "run the virtual-time simulation");
    simulate->add_option("--config", config_path, "experiment config file")->required();
    simulate->add_option("--out", out_dir, "output directory (default: out)");

    auto* serve = app.add_subcommand("serve", "run the FL server over TCP");
    serve->add_option("--config", config_path, "experiment config file")->required();
    serve->add_option("--listen", endpoint, "HOST:PORT to listen on")->required();
    serve->add_option("--out", out_dir, "output directory (default: out)");

    auto* client = app.add_subcommand("client", "run one client executor");
    client->add_option("--connect", endpoint, "HOST:PORT of the server")->required();
    client->add_option("--client-id-file", id_file, "file persisting the assigned id")
        ->required();

    auto* replay = app.add_subcommand("replay", "verify an event log reproduces its digest");
    replay->add_option("--log", log_path, "event log (JSON lines)")->required();

    auto* report = app.add_subcommand("report", "aggregate metrics CSVs into mean/std");
    report->add_option("--in", in_dir, "directory of metrics CSVs")->required();
    report->add_option("--out", report_out, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, out_dir);
        if (serve->parsed()) return cmd_serve(config_path, endpoint, out_dir);
        if (client->parsed()) {
            const auto [host, port] = split_endpoint(endpoint);
            ClientOptions opts;
            opts.host = host;
            opts.port = port;
            opts.id_file = id_file;
            return run_client(opts);
        }
        if (replay->parsed()) return cmd_replay(log_path);
        if (report->parsed()) return cmd_report(in_dir, report_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}
