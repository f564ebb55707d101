// Acceptance suite: runs every release criterion at its stated tolerance
// and prints one [PASS]/[FAIL] line per criterion. Needs the path to the
// fsreal CLI binary as argv[1] (criteria 8 and 9 spawn it).

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "fsreal/aggregate.hpp"
#include "fsreal/codec.hpp"
#include "fsreal/config.hpp"
#include "fsreal/device.hpp"
#include "fsreal/event_log.hpp"
#include "fsreal/metrics.hpp"
#include "fsreal/replay.hpp"
#include "fsreal/rng.hpp"
#include "fsreal/serialize.hpp"
#include "fsreal/server.hpp"
#include "fsreal/sim.hpp"

namespace fs = std::filesystem;
using namespace fsreal;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_binary;
fs::path g_workdir;

struct Criterion {
    std::string name;
    std::function<bool(std::string&)> run;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

ModelParams random_params(const Layout& layout, Rng& rng, double scale = 1.0) {
    std::vector<double> v(layout.total_length());
    for (double& x : v) x = rng.next_normal() * scale;
    return ModelParams(std::move(v), layout);
}

// ---------------------------------------------------------------- 1
bool aggregation_oracle(std::string& detail) {
    const auto start = Clock::now();
    Rng rng(20240901);
    for (int instance = 0; instance < 1000; ++instance) {
        const size_t n_params = 1 + rng.next_below(64);
        const size_t body_len = 1 + rng.next_below(n_params);
        Layout layout = body_len < n_params
                            ? Layout::from_lengths({{"body", body_len},
                                                    {"head", n_params - body_len}})
                            : Layout::from_lengths({{"body", n_params}});
        const size_t n_clients = 1 + rng.next_below(8);

        std::vector<UpdateRecord> updates;
        for (size_t c = 0; c < n_clients; ++c) {
            UpdateRecord u;
            u.client_id = c;
            u.params = random_params(layout, rng, 2.0);
            u.n_samples = 1 + rng.next_below(100);
            u.origin_round = rng.next_below(5);
            u.upload_mask = layout.layer_names();
            updates.push_back(std::move(u));
        }
        const auto prev = random_params(layout, rng);

        // FedAvg vs direct weighted sum.
        const auto avg = fedavg_aggregate(updates, prev);
        uint64_t total = 0;
        for (const auto& u : updates) total += u.n_samples;
        for (size_t k = 0; k < n_params; ++k) {
            double expect = 0.0;
            for (const auto& u : updates) {
                expect += static_cast<double>(u.n_samples) / static_cast<double>(total) *
                          u.params.values[k];
            }
            if (std::abs(avg.values[k] - expect) >= 1e-12) {
                detail = "fedavg mismatch at instance " + std::to_string(instance);
                return false;
            }
        }

        // FedBuff vs direct formula.
        const uint64_t current_round = 4;
        const double server_lr = 0.25 + rng.next_unit();
        const auto buf = fedbuff_aggregate(prev, updates, server_lr, current_round);
        for (size_t k = 0; k < n_params; ++k) {
            double acc = 0.0;
            for (const auto& u : updates) {
                const double tau = static_cast<double>(current_round - u.origin_round);
                acc += u.params.values[k] / std::sqrt(1.0 + tau);
            }
            const double expect =
                prev.values[k] + server_lr * acc / static_cast<double>(n_clients);
            if (std::abs(buf.values[k] - expect) >= 1e-12) {
                detail = "fedbuff mismatch at instance " + std::to_string(instance);
                return false;
            }
        }
    }
    const double elapsed = seconds_since(start);
    detail = "1000 instances in " + std::to_string(elapsed) + " s";
    return elapsed < 5.0;
}

// ---------------------------------------------------------------- 2
bool aimd_state_machine(std::string& detail) {
    // Pure fold oracle over 'T' (timeout), 'C' (clean round), 'R' (round
    // with rebroadcast), with t_o=60, delta=5, k=3, floor=1.
    struct Fold {
        double t0 = 60.0, floor = 1.0, delta = 5.0;
        size_t k = 3, clean = 0;
        void apply(char ev) {
            if (ev == 'T') {
                t0 *= 2.0;
                clean = 0;
            } else if (ev == 'R') {
                clean = 0;
            } else if (++clean >= k) {
                t0 = std::max(floor, t0 - delta);
                clean = 0;
            }
        }
    };

    // Scripts covering doubling, counter resets, and (via the long tail of
    // clean rounds) the floor clamp at 1 s.
    std::vector<std::string> scripts = {
        "CCC",
        "TRC",
        "CCTRCCCC",
        "TTTTRCCC",
        std::string(40, 'C'),                       // drains 60 down to the floor
        "TR" + std::string(80, 'C'),                // doubles then drains 120 to the floor
        "CCTRCCCTTRCCCCCCCCC",
    };
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {  // randomized scripts on top
        std::string s;
        const size_t len = 1 + rng.next_below(60);
        for (size_t j = 0; j < len; ++j) s.push_back("TCR"[rng.next_below(3)]);
        scripts.push_back(std::move(s));
    }

    for (const auto& script : scripts) {
        TimeoutController ctrl(60.0, 1.0);
        Fold fold;
        for (char ev : script) {
            if (ev == 'T') {
                ctrl.on_timeout();
            } else {
                ctrl.on_round_complete(ev == 'R', 3, 5.0);
            }
            fold.apply(ev);
            if (ctrl.current_timeout() != fold.t0) {  // byte-exact
                detail = "t_o diverged on script '" + script + "'";
                return false;
            }
        }
    }
    detail = std::to_string(scripts.size()) + " scripts, byte-exact";
    return true;
}

// ---------------------------------------------------------------- 3
bool selection_formulas(std::string& detail) {
    for (size_t n = 1; n <= 50; ++n) {
        for (double q : {1.0, 1.25, 1.5, 2.0}) {
            for (size_t n_ava = 0; n_ava <= 100; ++n_ava) {
                const auto target =
                    static_cast<size_t>(std::floor(q * static_cast<double>(n)));
                if (select_broadcast_count(n, q, n_ava) != std::min(n_ava, target)) {
                    detail = "broadcast count wrong at n=" + std::to_string(n);
                    return false;
                }
                const size_t surplus = n_ava > n ? n_ava - n : 0;
                if (rebroadcast_count(n, n_ava) != std::min(n, surplus)) {
                    detail = "rebroadcast count wrong at n=" + std::to_string(n);
                    return false;
                }
            }
        }
    }
    detail = "exhaustive over n in [1,50], q in {1,1.25,1.5,2}, n_ava in [0,100]";
    return true;
}

// ---------------------------------------------------------------- 4
bool beta_binomial_sampler(std::string& detail) {
    const auto start = Clock::now();
    const std::vector<std::pair<double, double>> params = {
        {10.0, 10.0}, {10.0, 2.0}, {0.2, 0.2}};
    for (const auto& [alpha, beta] : params) {
        double sum = 0.0;
        for (int i = 0; i < 72; ++i) sum += beta_binomial_pmf(i, 71, alpha, beta);
        if (std::abs(sum - 1.0) > 1e-12) {
            detail = "pmf sum off for alpha=" + std::to_string(alpha);
            return false;
        }

        const auto dist = DeviceDistribution::beta_binomial(alpha, beta);
        Rng rng(static_cast<uint64_t>(alpha * 1000 + beta));
        std::vector<int> counts(72, 0);
        const int draws = 100000;
        for (int i = 0; i < draws; ++i) ++counts[sample_capacity_index(dist, rng)];
        double tv = 0.0;
        for (int i = 0; i < 72; ++i) {
            tv += std::abs(static_cast<double>(counts[i]) / draws -
                           beta_binomial_pmf(i, 71, alpha, beta));
        }
        tv /= 2.0;
        if (tv >= 0.02) {
            detail = "TV distance " + std::to_string(tv) + " for alpha=" +
                     std::to_string(alpha) + ", beta=" + std::to_string(beta);
            return false;
        }
    }
    const double elapsed = seconds_since(start);
    detail = "3 parameter pairs, 100k draws each, " + std::to_string(elapsed) + " s";
    return elapsed < 10.0;
}

// ---------------------------------------------------------------- 5
bool compression_criterion(std::string& detail) {
    Layout layout = Layout::from_lengths({{"body", 90000}, {"head", 10000}});
    Rng rng(5150);
    const auto p = random_params(layout, rng);

    const double none_b = static_cast<double>(encode(p, CodecKind::kNone).size());
    const double fp16_b = static_cast<double>(encode(p, CodecKind::kFp16).size());
    const auto int8_payload = encode(p, CodecKind::kInt8);
    const double int8_b = static_cast<double>(int8_payload.size());
    const double fp16_ratio = fp16_b / none_b;
    const double int8_ratio = int8_b / none_b;
    if (std::abs(fp16_ratio - 0.5) > 0.01) {
        detail = "fp16/none ratio " + std::to_string(fp16_ratio);
        return false;
    }
    if (int8_ratio > 0.27) {
        detail = "int8/none ratio " + std::to_string(int8_ratio);
        return false;
    }

    // int8 reconstruction error within scale/2 per layer.
    const auto back = decode(int8_payload);
    for (const auto& layer : layout.layers()) {
        double max_abs = 0.0;
        for (size_t i = layer.offset; i < layer.offset + layer.length; ++i) {
            max_abs = std::max(max_abs, std::abs(p.values[i]));
        }
        const double scale =
            max_abs > 0.0 ? static_cast<double>(static_cast<float>(max_abs / 127.0)) : 1.0;
        for (size_t i = layer.offset; i < layer.offset + layer.length; ++i) {
            if (std::abs(back.values[i] - p.values[i]) > scale / 2.0 + 1e-12) {
                detail = "int8 error above scale/2 in layer " + layer.name;
                return false;
            }
        }
    }

    // gzip and none round-trips, 1000 fuzzed payloads, bit-exact.
    for (int i = 0; i < 1000; ++i) {
        const size_t body = 1 + rng.next_below(300);
        const size_t head = 1 + rng.next_below(50);
        Layout l = Layout::from_lengths({{"body", body}, {"head", head}});
        std::vector<double> v(l.total_length());
        for (double& x : v) {
            x = static_cast<double>(static_cast<float>(rng.next_normal() * 10.0));
        }
        const ModelParams q(v, l);
        const auto raw = encode(q, CodecKind::kNone);
        const auto zipped = encode(q, CodecKind::kGzip);
        const auto via_none = decode(raw);
        const auto via_gzip = decode(zipped);
        if (!(via_none == q) || !(via_gzip == q) || encode(via_gzip, CodecKind::kGzip) != zipped) {
            detail = "lossless roundtrip failed at payload " + std::to_string(i);
            return false;
        }
    }
    std::ostringstream os;
    os << "fp16/none=" << fp16_ratio << " int8/none=" << int8_ratio
       << ", 1000 lossless roundtrips bit-exact";
    detail = os.str();
    return true;
}

SimConfig learning_config(uint64_t seed) {
    SimConfig cfg;
    cfg.total_clients = 100;
    cfg.availability_rate = 0.3;
    cfg.seed = seed;
    cfg.device_dist = DeviceDistribution::beta_binomial(10.0, 10.0);
    cfg.data.n_clients = 100;
    cfg.data.n_classes = 4;
    cfg.data.dim = 10;
    cfg.data.samples_per_client = 50;
    cfg.data.dirichlet_alpha = 0.5;
    cfg.server.n_participants = 30;
    cfg.server.response_goal = 30;
    cfg.server.over_selection_q = 1.5;
    cfg.server.max_rounds = 100;
    cfg.train.learning_rate = 0.1;
    cfg.train.batch_size = 16;
    cfg.train.local_epochs = 1;
    return cfg;
}

// ---------------------------------------------------------------- 6
bool learning_sanity(std::string& detail) {
    const auto start = Clock::now();
    auto cfg = learning_config(11);
    std::ostringstream log;
    const auto fedavg = run_simulation(cfg, log);
    const double elapsed = seconds_since(start);
    if (fedavg.report.acc_mean_weighted < 0.90) {
        detail = "fedavg weighted test accuracy " +
                 std::to_string(fedavg.report.acc_mean_weighted) + " < 0.90";
        return false;
    }
    if (elapsed >= 60.0) {
        detail = "run took " + std::to_string(elapsed) + " s";
        return false;
    }

    auto ft_cfg = cfg;
    ft_cfg.algorithm = AlgorithmMode::kFt;
    ft_cfg.finetune_epochs = 5;
    std::ostringstream ft_log;
    const auto ft = run_simulation(ft_cfg, ft_log);
    if (ft.report.acc_mean_weighted < fedavg.report.acc_mean_weighted) {
        detail = "ft " + std::to_string(ft.report.acc_mean_weighted) + " < fedavg " +
                 std::to_string(fedavg.report.acc_mean_weighted);
        return false;
    }
    std::ostringstream os;
    os << "fedavg=" << fedavg.report.acc_mean_weighted
       << " ft=" << ft.report.acc_mean_weighted << " rounds=" << fedavg.completed_rounds
       << " in " << elapsed << " s";
    detail = os.str();
    return true;
}

// ---------------------------------------------------------------- 7
bool async_utilization(std::string& detail) {
    const auto start = Clock::now();
    int async_wins = 0;
    std::ostringstream os;
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        auto sync_cfg = learning_config(seed);
        sync_cfg.device_dist = DeviceDistribution::beta_binomial(10.0, 2.0);
        sync_cfg.patience = 200;   // run the full 100 rounds
        sync_cfg.drop_prob = 0.5;  // fresh per-round availability, so sync
                                   // rounds wait on their stragglers
        std::ostringstream sync_log;
        const auto sync = run_simulation(sync_cfg, sync_log);

        auto async_cfg = sync_cfg;
        async_cfg.server.mode = ServerMode::kAsync;
        async_cfg.server.async_goal_K = 3;  // 10% of participants
        std::ostringstream async_log;
        const auto async = run_simulation(async_cfg, async_log);

        if (async.report.uti_mean > sync.report.uti_mean) ++async_wins;
        os << " s" << seed << ":" << async.report.uti_mean << ">" << sync.report.uti_mean
           << "?";
    }
    const double elapsed = seconds_since(start);
    os << " wins=" << async_wins << "/5 in " << elapsed << " s";
    detail = os.str();
    return async_wins >= 4 && elapsed < 300.0;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(g_binary.c_str()));
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    const pid_t pid = fork();
    if (pid == 0) {
        execv(g_binary.c_str(), argv.data());
        _exit(127);
    }
    int status = 0;
    waitpid(pid, &status, 0);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------- 8
bool determinism_and_replay(std::string& detail) {
    const fs::path dir = g_workdir / "determinism";
    fs::create_directories(dir);
    const fs::path config_path = dir / "run.toml";
    {
        std::ofstream out(config_path);
        out << "total_clients = 12\n"
            << "distribution = \"uniform\"\n"
            << "n_participants = 4\n"
            << "response_goal = 3\n"
            << "max_rounds = 4\n"
            << "samples_per_client = 30\n"
            << "hidden_width = 8\n"
            << "seeds = [9]\n"
            << "label = \"det\"\n";
    }

    if (run_cli({"simulate", "--config", config_path.string(), "--out",
                 (dir / "a").string()}) != 0 ||
        run_cli({"simulate", "--config", config_path.string(), "--out",
                 (dir / "b").string()}) != 0) {
        detail = "simulate runs failed";
        return false;
    }
    const fs::path log_a = dir / "a" / "det_seed9.jsonl";
    const fs::path log_b = dir / "b" / "det_seed9.jsonl";
    if (slurp(log_a) != slurp(log_b)) {
        detail = "event logs differ between identical runs";
        return false;
    }

    if (run_cli({"replay", "--log", log_a.string()}) != 0) {
        detail = "replay of an untampered log did not exit 0";
        return false;
    }

    // Flip one payload byte; replay must detect it with exit code 2.
    std::string content = slurp(log_a);
    const std::string key = "\"payload_b64\":\"";
    const size_t pos = content.find(key);
    if (pos == std::string::npos) {
        detail = "no payload found in log";
        return false;
    }
    const size_t flip = pos + key.size();
    content[flip] = content[flip] == 'A' ? 'B' : 'A';
    const fs::path tampered = dir / "tampered.jsonl";
    {
        std::ofstream out(tampered);
        out << content;
    }
    const int rc = run_cli({"replay", "--log", tampered.string()});
    if (rc != 2) {
        detail = "tampered replay exited " + std::to_string(rc) + ", want 2";
        return false;
    }
    detail = "identical logs, replay ok, tamper detected with exit 2";
    return true;
}

// ---------------------------------------------------------------- 9
bool cross_mode_equivalence(std::string& detail) {
    const fs::path dir = g_workdir / "crossmode";
    fs::create_directories(dir);
    const fs::path config_path = dir / "cross.toml";
    {
        std::ofstream out(config_path);
        out << "total_clients = 5\n"
            << "distribution = \"homo\"\n"
            << "homo_index = 71\n"           // zero-latency profile
            << "availability_rate = 1.0\n"
            << "n_participants = 5\n"
            << "response_goal = 5\n"
            << "over_selection_q = 1.0\n"
            << "timeout_t0_s = 60.0\n"
            << "max_rounds = 3\n"
            << "samples_per_client = 30\n"
            << "hidden_width = 8\n"
            << "seeds = [4]\n"
            << "label = \"cross\"\n";
    }

    if (run_cli({"simulate", "--config", config_path.string(), "--out",
                 (dir / "sim").string()}) != 0) {
        detail = "simulate failed";
        return false;
    }

    const uint16_t port = static_cast<uint16_t>(42101 + (getpid() % 400));
    const std::string endpoint = "127.0.0.1:" + std::to_string(port);

    const pid_t server_pid = fork();
    if (server_pid == 0) {
        execl(g_binary.c_str(), g_binary.c_str(), "serve", "--config",
              config_path.string().c_str(), "--listen", endpoint.c_str(), "--out",
              (dir / "net").string().c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    std::vector<pid_t> clients;
    for (int i = 0; i < 5; ++i) {
        const pid_t pid = fork();
        if (pid == 0) {
            const std::string id_file = (dir / ("id" + std::to_string(i))).string();
            execl(g_binary.c_str(), g_binary.c_str(), "client", "--connect",
                  endpoint.c_str(), "--client-id-file", id_file.c_str(),
                  static_cast<char*>(nullptr));
            _exit(127);
        }
        clients.push_back(pid);
    }
    bool spawn_ok = true;
    int status = 0;
    waitpid(server_pid, &status, 0);
    spawn_ok &= WIFEXITED(status) && WEXITSTATUS(status) == 0;
    for (pid_t pid : clients) {
        waitpid(pid, &status, 0);
        spawn_ok &= WIFEXITED(status) && WEXITSTATUS(status) == 0;
    }
    if (!spawn_ok) {
        detail = "server or client process exited nonzero";
        return false;
    }

    // Per-round sets of accepted (client, payload) must match exactly.
    auto accepted_sets = [](const fs::path& log_path) {
        std::map<uint64_t, std::set<std::pair<uint64_t, std::string>>> rounds;
        const auto log = read_event_log(log_path.string());
        for (const auto& e : log.events) {
            if (e.type == "response" && e.status == "accepted") {
                rounds[e.round].insert({e.client_id, e.payload_b64});
            }
        }
        return rounds;
    };
    const auto sim_rounds = accepted_sets(dir / "sim" / "cross_seed4.jsonl");
    const auto net_rounds = accepted_sets(dir / "net" / "cross_serve_seed4.jsonl");
    if (sim_rounds.size() != 3 || net_rounds.size() != 3) {
        detail = "expected 3 aggregated rounds in both logs, got " +
                 std::to_string(sim_rounds.size()) + " and " +
                 std::to_string(net_rounds.size());
        return false;
    }
    if (sim_rounds != net_rounds) {
        detail = "aggregation input sets differ between sim and distributed run";
        return false;
    }
    detail = "3 rounds, 5 clients: aggregation inputs identical across modes";
    return true;
}

// ---------------------------------------------------------------- 10
bool metric_oracles(std::string& detail) {
    Rng rng(606);
    for (int instance = 0; instance < 100; ++instance) {
        const size_t m = 1 + rng.next_below(50);
        std::vector<ClientEval> evals;
        for (size_t i = 0; i < m; ++i) {
            evals.push_back({i, rng.next_unit(), 1 + rng.next_below(200),
                             rng.next_below(40)});
        }

        double num = 0.0, den = 0.0;
        for (const auto& e : evals) {
            num += e.accuracy * static_cast<double>(e.n_samples);
            den += static_cast<double>(e.n_samples);
        }
        if (std::abs(weighted_mean_acc(evals) - num / den) >= 1e-12) {
            detail = "weighted mean mismatch";
            return false;
        }

        std::vector<double> sorted;
        for (const auto& e : evals) sorted.push_back(e.accuracy);
        std::sort(sorted.begin(), sorted.end());
        const size_t rank = static_cast<size_t>(std::ceil(0.1 * static_cast<double>(m)));
        if (bottom_decile_acc(evals) != sorted[std::max<size_t>(rank, 1) - 1]) {
            detail = "bottom decile mismatch";
            return false;
        }

        double mean = 0.0;
        for (const auto& e : evals) mean += e.accuracy;
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (const auto& e : evals) var += (e.accuracy - mean) * (e.accuracy - mean);
        if (std::abs(acc_std(evals) - std::sqrt(var / static_cast<double>(m))) >= 1e-12) {
            detail = "std mismatch";
            return false;
        }

        const double t_conv_h = 0.1 + rng.next_unit() * 5.0;
        const auto [um, us] = utilization(evals, t_conv_h);
        double umean = 0.0;
        for (const auto& e : evals) umean += static_cast<double>(e.n_contrib) / t_conv_h;
        umean /= static_cast<double>(m);
        double uvar = 0.0;
        for (const auto& e : evals) {
            const double u = static_cast<double>(e.n_contrib) / t_conv_h;
            uvar += (u - umean) * (u - umean);
        }
        if (std::abs(um - umean) >= 1e-12 ||
            std::abs(us - std::sqrt(uvar / static_cast<double>(m))) >= 1e-12) {
            detail = "utilization mismatch";
            return false;
        }

        std::vector<LogEvent> events;
        uint64_t expect_total = 0;
        for (int e = 0; e < 30; ++e) {
            LogEvent ev;
            const int kind = static_cast<int>(rng.next_below(4));
            ev.type = kind == 0 ? "broadcast"
                      : kind == 1 ? "rebroadcast"
                      : kind == 2 ? "response"
                                  : "aggregate";
            ev.bytes = rng.next_below(5000);
            if (kind != 3) expect_total += ev.bytes;
            events.push_back(ev);
        }
        const double t_s = 1.0 + rng.next_unit() * 100.0;
        const auto [total, rate] = traffic(events, t_s);
        if (total != expect_total ||
            std::abs(rate - static_cast<double>(expect_total) / t_s) >= 1e-12) {
            detail = "traffic mismatch";
            return false;
        }
    }
    detail = "100 random instances, all five metrics within 1e-12";
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: fsreal_acceptance <path-to-fsreal-binary>\n";
        return 2;
    }
    g_binary = argv[1];
    g_workdir = fs::temp_directory_path() / ("fsreal_acceptance_" + std::to_string(getpid()));
    fs::create_directories(g_workdir);

    const std::vector<Criterion> criteria = {
        {"1. aggregation oracle (fedavg + fedbuff vs brute force, 1e-12)", aggregation_oracle},
        {"2. AIMD timeout state machine matches the pure fold oracle", aimd_state_machine},
        {"3. selection and rebroadcast formulas, exhaustive", selection_formulas},
        {"4. beta-binomial sampler within TV 0.02 of the pmf", beta_binomial_sampler},
        {"5. compression ratios and lossless roundtrips", compression_criterion},
        {"6. learning sanity: fedavg >= 0.90, ft >= fedavg", learning_sanity},
        {"7. async utilization exceeds sync under strong-heavy devices", async_utilization},
        {"8. determinism and replay tamper detection", determinism_and_replay},
        {"9. cross-mode equivalence (sim vs 5-process distributed run)",
         cross_mode_equivalence},
        {"10. metric oracles within 1e-12", metric_oracles},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << c.name;
        if (!detail.empty()) std::cout << " :: " << detail;
        std::cout << std::endl;
        if (!ok) ++failures;
    }

    std::error_code ec;
    fs::remove_all(g_workdir, ec);

    if (failures > 0) {
        std::cout << failures << " criterion(s) failed" << std::endl;
        return 1;
    }
    std::cout << "all 10 criteria passed" << std::endl;
    return 0;
}
