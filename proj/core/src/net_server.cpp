#include "fsreal/net_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "fsreal/digest.hpp"
#include "fsreal/errors.hpp"
#include "fsreal/log.hpp"
#include "fsreal/serialize.hpp"
#include "fsreal/wire.hpp"

namespace fsreal {

namespace {

using Clock = std::chrono::steady_clock;

bool read_exact(int fd, uint8_t* buf, size_t n) {
    size_t done = 0;
    while (done < n) {
        const ssize_t r = ::recv(fd, buf + done, n - done, 0);
        if (r <= 0) return false;
        done += static_cast<size_t>(r);
    }
    return true;
}

bool write_all(int fd, const uint8_t* buf, size_t n) {
    size_t done = 0;
    while (done < n) {
        const ssize_t w = ::send(fd, buf + done, n - done, MSG_NOSIGNAL);
        if (w <= 0) return false;
        done += static_cast<size_t>(w);
    }
    return true;
}

std::optional<Frame> read_frame(int fd) {
    uint8_t header[kFrameHeaderBytes];
    if (!read_exact(fd, header, kFrameHeaderBytes)) return std::nullopt;
    const uint32_t payload_len = header_payload_len(header);
    std::vector<uint8_t> buf(kFrameHeaderBytes + payload_len);
    std::memcpy(buf.data(), header, kFrameHeaderBytes);
    if (payload_len > 0 && !read_exact(fd, buf.data() + kFrameHeaderBytes, payload_len)) {
        return std::nullopt;
    }
    return frame_decode(buf.data(), buf.size());
}

struct InboundEvent {
    enum class Kind { kFrame, kDisconnect };
    Kind kind = Kind::kFrame;
    int fd = -1;
    Frame frame;
};

}  // namespace

ServeResult run_server(const SimConfig& cfg, const ServeOptions& opts,
                       std::ostream& log_out) {
    cfg.validate();
    if (cfg.total_clients < 1) throw ConfigError("serve needs at least one client");

    const ModelArch arch = cfg.arch();
    const auto shards = generate_synthetic_federation(cfg.data, cfg.seed);
    ServerProcessor proc(cfg.server, init_model(arch, cfg.seed));
    EventLogWriter writer(log_out);
    writer.write_header(sim_config_to_json(cfg), cfg.seed);

    const int listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd < 0) throw IoError("socket() failed");
    const int one = 1;
    ::setsockopt(listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(opts.port);
    if (::inet_pton(AF_INET, opts.host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd);
        throw ConfigError("bad listen address '" + opts.host + "'");
    }
    if (::bind(listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(listen_fd);
        throw IoError("bind failed on " + opts.host + ":" + std::to_string(opts.port));
    }
    if (::listen(listen_fd, 64) != 0) {
        ::close(listen_fd);
        throw IoError("listen failed");
    }
    sockaddr_in bound{};
    socklen_t bound_len = sizeof(bound);
    ::getsockname(listen_fd, reinterpret_cast<sockaddr*>(&bound), &bound_len);
    std::cout << "listening on " << opts.host << ":" << ntohs(bound.sin_port) << std::endl;

    std::mutex mu;
    std::condition_variable cv;
    std::deque<InboundEvent> inbox;
    bool accepting = true;
    std::vector<std::thread> readers;

    auto reader_loop = [&](int fd) {
        for (;;) {
            auto frame = read_frame(fd);
            std::lock_guard<std::mutex> lock(mu);
            if (!frame) {
                inbox.push_back({InboundEvent::Kind::kDisconnect, fd, {}});
                cv.notify_one();
                return;
            }
            inbox.push_back({InboundEvent::Kind::kFrame, fd, std::move(*frame)});
            cv.notify_one();
        }
    };

    std::thread acceptor([&] {
        for (;;) {
            const int fd = ::accept(listen_fd, nullptr, nullptr);
            std::lock_guard<std::mutex> lock(mu);
            if (!accepting) {  // shutdown wakeup (or racing connect)
                if (fd >= 0) ::close(fd);
                return;
            }
            if (fd < 0) return;
            const int nodelay = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &nodelay, sizeof(nodelay));
            readers.emplace_back(reader_loop, fd);
        }
    });

    // ---- processor state (single thread from here on) ----
    const auto t_start = Clock::now();
    auto now_s = [&] {
        return std::chrono::duration<double>(Clock::now() - t_start).count();
    };

    std::map<uint64_t, int> client_fd;   // connected clients
    std::map<int, uint64_t> fd_client;
    std::set<uint64_t> busy;             // tasked, upload not yet received
    std::vector<LogEvent> events;
    std::vector<HistoryPoint> history;
    uint64_t log_seq = 0;
    uint64_t next_id = 0;
    bool started = false;
    bool stopping = false;
    std::optional<Clock::time_point> deadline;
    uint64_t deadline_round = 0;
    uint64_t deadline_generation = 0;
    bool has_best = false;
    double best_val = 0.0;
    uint64_t best_round = 0;
    uint64_t inflight = 0;

    auto log_event = [&](LogEvent e) {
        e.ts = now_s();
        e.seq = log_seq++;
        writer.write(e);
        events.push_back(std::move(e));
    };

    auto send_frame = [&](uint64_t client, const Frame& frame) {
        const auto it = client_fd.find(client);
        if (it == client_fd.end()) return false;
        const auto bytes = frame_encode(frame);
        return write_all(it->second, bytes.data(), bytes.size());
    };

    auto idle_clients = [&] {
        std::vector<uint64_t> ids;
        for (const auto& [id, fd] : client_fd) {
            if (!busy.count(id)) ids.push_back(id);
        }
        return ids;  // map iteration: already sorted ascending
    };

    auto broadcast_to = [&](const std::vector<uint64_t>& targets, uint64_t round,
                            bool is_rebroadcast) {
        if (targets.empty()) return;
        const auto payload = encode(proc.global(), cfg.codec);
        Frame frame;
        frame.msg_type = MsgType::kTaskBroadcast;
        frame.round = static_cast<uint32_t>(round);
        frame.codec_id = static_cast<uint8_t>(cfg.codec);
        frame.payload = payload;
        for (uint64_t c : targets) {
            busy.insert(c);
            ++inflight;
            send_frame(c, frame);
            LogEvent ev;
            ev.type = is_rebroadcast ? "rebroadcast" : "broadcast";
            ev.round = round;
            ev.client_id = c;
            ev.bytes = frame.wire_size();
            log_event(std::move(ev));
        }
    };

    auto arm_timer = [&](double delta_s, uint64_t round, uint64_t generation) {
        deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                      std::chrono::duration<double>(delta_s));
        deadline_round = round;
        deadline_generation = generation;
    };

    auto start_round = [&](uint64_t round) {
        const size_t n = cfg.server.n_participants;
        const auto idle = idle_clients();
        const size_t n_ava = idle.size();
        const size_t count =
            cfg.server.mode == ServerMode::kSync
                ? select_broadcast_count(n, cfg.server.over_selection_q, n_ava)
                : std::min(n_ava, n);
        Rng sel_rng = derive_rng(cfg.seed, "select", round, 0);
        const auto targets = sample_without_replacement(idle, count, sel_rng);
        proc.on_broadcast(round, targets);
        broadcast_to(targets, round, false);
        if (cfg.server.mode == ServerMode::kSync) {
            arm_timer(proc.controller().current_timeout(), round, 0);
        }
    };

    auto evaluate_val_acc = [&] {
        double num = 0.0, den = 0.0;
        for (const auto& shard : shards) {
            num += evaluate_accuracy(proc.global(), shard, Split::kVal, arch) *
                   static_cast<double>(shard.n_samples);
            den += static_cast<double>(shard.n_samples);
        }
        return den > 0.0 ? num / den : 0.0;
    };

    auto refill_one = [&] {
        const auto idle = idle_clients();
        if (idle.empty()) return;
        Rng rng = derive_rng(cfg.seed, "refill", 0, log_seq);
        const auto targets = sample_without_replacement(idle, 1, rng);
        broadcast_to(targets, proc.current_round(), false);
    };

    auto after_aggregation = [&] {
        const uint64_t completed = proc.current_round() - 1;
        LogEvent agg;
        agg.type = "aggregate";
        agg.round = completed;
        agg.n_updates = cfg.server.mode == ServerMode::kSync ? cfg.server.response_goal
                                                             : cfg.server.async_goal_K;
        agg.model_digest = sha256_hex(serialize_params(proc.global()));
        log_event(std::move(agg));
        deadline.reset();

        const double val_acc = evaluate_val_acc();
        LogEvent ev;
        ev.type = "eval";
        ev.round = completed;
        ev.val_acc = val_acc;
        log_event(std::move(ev));
        history.push_back({completed, now_s(), val_acc});

        if (!has_best || val_acc > best_val + cfg.min_delta) {
            has_best = true;
            best_val = val_acc;
            best_round = completed;
        } else if (completed - best_round >= cfg.patience) {
            stopping = true;
        }
        if (proc.completed_rounds() >= cfg.server.max_rounds) stopping = true;

        if (!stopping && cfg.server.mode == ServerMode::kSync) {
            start_round(proc.current_round());
        }
    };

    auto handle_hello = [&](int fd, const Frame& frame) {
        uint64_t id;
        if (frame.sender_id != UINT64_MAX && frame.sender_id < cfg.total_clients) {
            id = frame.sender_id;  // returning client keeps its identity
            const auto old = client_fd.find(id);
            if (old != client_fd.end() && old->second != fd) {
                ::shutdown(old->second, SHUT_RDWR);  // stale half-open connection
                fd_client.erase(old->second);
            }
        } else {
            while (next_id < cfg.total_clients && client_fd.count(next_id)) ++next_id;
            if (next_id >= cfg.total_clients) {
                FSREAL_LOG_INFO("rejecting extra client (federation full)");
                ::shutdown(fd, SHUT_RDWR);
                return;
            }
            id = next_id++;
        }
        client_fd[id] = fd;
        fd_client[fd] = id;

        nlohmann::json conf;
        conf["assigned_id"] = id;
        conf["root_seed"] = cfg.seed;
        conf["total_clients"] = cfg.total_clients;
        conf["n_classes"] = cfg.data.n_classes;
        conf["dim"] = cfg.data.dim;
        conf["samples_per_client"] = cfg.data.samples_per_client;
        conf["data_alpha"] = cfg.data.dirichlet_alpha;
        conf["hidden_width"] = cfg.hidden_width;
        conf["learning_rate"] = cfg.train.learning_rate;
        conf["local_epochs"] = cfg.train.local_epochs;
        conf["batch_size"] = cfg.train.batch_size;
        conf["algorithm"] = to_string(cfg.algorithm);
        conf["mode"] = to_string(cfg.server.mode);
        conf["codec"] = to_string(cfg.codec);
        conf["latency_inject_s"] = opts.latency_inject_s;
        const std::string text = conf.dump();

        Frame ack;
        ack.msg_type = MsgType::kAck;
        ack.sender_id = id;
        ack.payload.assign(text.begin(), text.end());
        const auto bytes = frame_encode(ack);
        write_all(fd, bytes.data(), bytes.size());
        FSREAL_LOG_INFO("client " << id << " connected (" << client_fd.size() << "/"
                                  << cfg.total_clients << ")");

        if (!started && client_fd.size() == cfg.total_clients) {
            started = true;
            start_round(0);
        }
    };

    auto handle_upload = [&](int fd, Frame&& frame) {
        const auto it = fd_client.find(fd);
        if (it == fd_client.end()) return;  // upload before hello: drop
        const uint64_t client = it->second;
        busy.erase(client);
        if (inflight > 0) --inflight;

        UpdateRecord update;
        update.client_id = client;
        try {
            update.params = decode(frame.payload);
        } catch (const CodecError& e) {
            FSREAL_LOG_INFO("dropping undecodable upload from client " << client << ": "
                                                                       << e.what());
            return;
        }
        update.upload_mask = update.params.layout.layer_names();
        update.n_samples = shards[client].train_count;
        update.origin_round = frame.round;

        const ResponseStatus status = proc.on_response(update);
        LogEvent ev;
        ev.type = "response";
        ev.round = frame.round;
        ev.client_id = client;
        ev.bytes = frame.wire_size();
        ev.n_samples = update.n_samples;
        ev.status = to_string(status);
        ev.payload_b64 = base64_encode(frame.payload);
        log_event(std::move(ev));

        if (proc.aggregation_fired()) after_aggregation();
        if (cfg.server.mode == ServerMode::kAsync && !stopping) refill_one();
    };

    auto handle_deadline = [&] {
        deadline.reset();
        const size_t n_ava_now = idle_clients().size();
        const auto action = proc.on_timeout_fire(deadline_round, deadline_generation, n_ava_now);
        if (!action) return;

        LogEvent ev;
        ev.type = "timeout";
        ev.round = deadline_round;
        ev.generation = deadline_generation;
        ev.n_ava = n_ava_now;
        ev.t_o_after = proc.controller().current_timeout();
        log_event(std::move(ev));

        std::vector<uint64_t> eligible;
        for (uint64_t c : idle_clients()) {
            if (!proc.round_state().ever_broadcast.count(c)) eligible.push_back(c);
        }
        Rng sel_rng = derive_rng(cfg.seed, "select", deadline_round, deadline_generation + 1);
        const auto targets = sample_without_replacement(
            std::move(eligible), action->rebroadcast_allowance, sel_rng);
        proc.on_rebroadcast(targets);
        broadcast_to(targets, deadline_round, true);
        arm_timer(action->next_deadline_delta, deadline_round, action->next_generation);
    };

    // Main processor loop.
    while (!stopping) {
        InboundEvent ev;
        {
            std::unique_lock<std::mutex> lock(mu);
            if (deadline) {
                if (!cv.wait_until(lock, *deadline, [&] { return !inbox.empty(); })) {
                    handle_deadline();
                    continue;
                }
            } else {
                cv.wait(lock, [&] { return !inbox.empty(); });
            }
            ev = std::move(inbox.front());
            inbox.pop_front();
        }
        if (ev.kind == InboundEvent::Kind::kDisconnect) {
            const auto it = fd_client.find(ev.fd);
            if (it != fd_client.end()) {
                FSREAL_LOG_INFO("client " << it->second << " disconnected");
                busy.erase(it->second);  // its in-flight task is lost
                client_fd.erase(it->second);
                fd_client.erase(it);
            }
            ::close(ev.fd);
            continue;
        }
        switch (ev.frame.msg_type) {
            case MsgType::kHello:
                handle_hello(ev.fd, ev.frame);
                break;
            case MsgType::kModelUpload:
                handle_upload(ev.fd, std::move(ev.frame));
                break;
            default:
                break;  // ack/shutdown from a client: ignore
        }
    }

    // Shutdown: notify clients, stop accepting, join every thread before
    // the shared state goes out of scope.
    Frame bye;
    bye.msg_type = MsgType::kShutdown;
    for (const auto& [id, fd] : client_fd) send_frame(id, bye);
    {
        std::lock_guard<std::mutex> lock(mu);
        accepting = false;
    }
    // A blocking accept() is not interrupted by close(); wake it with a
    // throwaway connection to our own port.
    {
        const int wake = ::socket(AF_INET, SOCK_STREAM, 0);
        if (wake >= 0) {
            sockaddr_in self = addr;
            self.sin_port = bound.sin_port;
            ::connect(wake, reinterpret_cast<sockaddr*>(&self), sizeof(self));
            ::close(wake);
        }
    }
    for (const auto& [id, fd] : client_fd) ::shutdown(fd, SHUT_RDWR);
    acceptor.join();
    ::close(listen_fd);
    std::vector<std::thread> to_join;
    {
        std::lock_guard<std::mutex> lock(mu);
        to_join.swap(readers);
    }
    for (auto& t : to_join) t.join();
    for (const auto& [id, fd] : client_fd) ::close(fd);

    // Final evaluation, identical to the simulation path.
    ServeResult result;
    const Convergence conv = detect_convergence(history, cfg.patience, cfg.min_delta);
    for (uint64_t c = 0; c < cfg.total_clients; ++c) {
        const ClientShard& shard = shards[c];
        ClientEval ce;
        ce.client_id = c;
        ce.n_samples = shard.n_samples;
        const auto it = proc.contributions().find(c);
        ce.n_contrib = it == proc.contributions().end() ? 0 : it->second;
        if (cfg.algorithm == AlgorithmMode::kFedAvg) {
            ce.accuracy = evaluate_accuracy(proc.global(), shard, Split::kTest, arch);
        } else {
            TrainConfig ft_cfg = cfg.train;
            ft_cfg.local_epochs = cfg.finetune_epochs;
            ft_cfg.seed = derive_seed(cfg.seed, "finetune", 0, c);
            const ModelParams personalized =
                personalize_finetune(proc.global(), shard, ft_cfg, arch);
            ce.accuracy = evaluate_accuracy(personalized, shard, Split::kTest, arch);
        }
        result.evals.push_back(ce);
    }

    MetricsReport report;
    report.acc_mean_weighted = weighted_mean_acc(result.evals);
    report.acc_bottom_decile = bottom_decile_acc(result.evals);
    report.acc_std = acc_std(result.evals);
    report.conv_round = conv.conv_round;
    report.t_conv_hours = conv.t_conv_hours;
    report.not_converged = conv.not_converged;
    const auto [total, rate] = traffic(events, conv.t_conv_hours * 3600.0);
    report.total_bytes = total;
    report.net_traffic_bytes_per_s = rate;
    if (conv.t_conv_hours > 0.0) {
        const auto [um, us] = utilization(result.evals, conv.t_conv_hours);
        report.uti_mean = um;
        report.uti_std = us;
    }
    result.report = report;
    result.final_model_digest = sha256_hex(serialize_params(proc.global()));
    result.completed_rounds = proc.completed_rounds();
    result.elapsed_s = now_s();

    RunFooter footer;
    footer.final_model_digest = result.final_model_digest;
    footer.completed_rounds = result.completed_rounds;
    footer.virtual_time_s = result.elapsed_s;
    footer.inflight_at_end = inflight;
    writer.write_footer(footer);
    result.events = std::move(events);
    return result;
}

}  // namespace fsreal
