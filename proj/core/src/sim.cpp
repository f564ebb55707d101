#include "fsreal/sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "fsreal/digest.hpp"
#include "fsreal/errors.hpp"
#include "fsreal/rng.hpp"
#include "fsreal/serialize.hpp"

namespace fsreal {

void SimConfig::validate() const {
    if (total_clients < 1) throw ConfigError("total_clients must be >= 1");
    if (!(availability_rate > 0.0) || availability_rate > 1.0) {
        throw ConfigError("availability_rate must be in (0, 1]");
    }
    if (!(train.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (train.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (hidden_width < 1) throw ConfigError("hidden_width must be >= 1");
    if (drop_prob < 0.0 || drop_prob >= 1.0) throw ConfigError("drop_prob must be in [0, 1)");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (min_delta < 0.0) throw ConfigError("min_delta must be >= 0");
    if (data.n_clients != total_clients) {
        throw ConfigError("data.n_clients must equal total_clients");
    }
    server.validate(total_clients);
}

SimEvent SimQueue::pop() {
    SimEvent e = *events_.begin();
    events_.erase(events_.begin());
    return e;
}

size_t SimQueue::cancel_stale_timers(uint64_t current_round) {
    size_t removed = 0;
    for (auto it = events_.begin(); it != events_.end();) {
        if (it->kind == SimEvent::Kind::kTimeoutFire && it->round < current_round) {
            it = events_.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

size_t SimQueue::pending_arrivals() const {
    size_t n = 0;
    for (const auto& e : events_) {
        if (e.kind == SimEvent::Kind::kResponseArrival) ++n;
    }
    return n;
}

namespace {

class Simulation {
public:
    Simulation(const SimConfig& cfg, std::ostream& log_out)
        : cfg_(cfg),
          arch_(cfg.arch()),
          pool_(cfg.total_clients, cfg.device_dist, cfg.seed),
          proc_(cfg.server, init_model(cfg.arch(), cfg.seed)),
          writer_(log_out) {
        shards_ = generate_synthetic_federation(cfg_.data, cfg_.seed);
    }

    SimResult run() {
        writer_.write_header(sim_config_to_json(cfg_), cfg_.seed);

        SimEvent kickoff;
        kickoff.vt = 0.0;
        kickoff.seq = queue_seq_++;
        kickoff.kind = SimEvent::Kind::kBroadcastDue;
        kickoff.round = 0;
        queue_.push(kickoff);

        while (!queue_.empty() && !stopping_) {
            SimEvent e = queue_.pop();
            now_ = e.vt;
            switch (e.kind) {
                case SimEvent::Kind::kBroadcastDue:
                    start_round(e.round);
                    break;
                case SimEvent::Kind::kRoundTick:
                    if (!stopping_) start_round(proc_.current_round());
                    break;
                case SimEvent::Kind::kResponseArrival:
                    handle_arrival(e);
                    break;
                case SimEvent::Kind::kTimeoutFire:
                    handle_timeout(e);
                    break;
            }
        }

        return finish();
    }

private:
    bool is_sync() const { return cfg_.server.mode == ServerMode::kSync; }

    std::vector<uint64_t> free_clients() const {
        std::vector<uint64_t> ids;
        for (uint64_t c = 0; c < cfg_.total_clients; ++c) {
            if (!busy_clients_.count(c)) ids.push_back(c);
        }
        return ids;
    }

    size_t available_now() const {
        const size_t devices = pool_.available_count();
        const size_t clients = cfg_.total_clients - busy_clients_.size();
        return std::min(devices, clients);
    }

    void log_event(LogEvent e) {
        e.ts = now_;
        e.seq = log_seq_++;
        writer_.write(e);
        events_.push_back(std::move(e));
    }

    void start_round(uint64_t round) {
        Rng drop_rng = derive_rng(cfg_.seed, "drop", round);
        pool_.roll_dropout(cfg_.drop_prob, drop_rng);

        const size_t n = cfg_.server.n_participants;
        const size_t n_ava = available_now();
        const size_t count = is_sync()
                                 ? select_broadcast_count(n, cfg_.server.over_selection_q, n_ava)
                                 : std::min(n_ava, n);

        Rng sel_rng = derive_rng(cfg_.seed, "select", round, 0);
        const auto targets = sample_without_replacement(free_clients(), count, sel_rng);
        proc_.on_broadcast(round, targets);
        do_broadcast(targets, round, false);

        if (is_sync()) {
            SimEvent timer;
            timer.vt = now_ + proc_.controller().current_timeout();
            timer.seq = queue_seq_++;
            timer.kind = SimEvent::Kind::kTimeoutFire;
            timer.round = round;
            timer.generation = 0;
            queue_.push(timer);
        }
    }

    // Trains each target eagerly, schedules its arrival at now + response
    // time, and logs one send per recipient.
    void do_broadcast(const std::vector<uint64_t>& clients, uint64_t round,
                      bool is_rebroadcast) {
        if (clients.empty()) return;
        const auto broadcast_payload = encode(proc_.global(), cfg_.codec);
        const ModelParams received = decode(broadcast_payload);
        const auto frozen = frozen_layers_for(cfg_.algorithm);
        const auto mask = make_upload_mask(cfg_.algorithm);

        Rng alloc_rng = derive_rng(cfg_.seed, "alloc", round, batch_counter_++);
        const auto devices = pool_.allocate(clients.size(), alloc_rng);
        if (devices.size() != clients.size()) {
            throw ProtocolError("device pool short allocation during broadcast");
        }

        for (size_t i = 0; i < clients.size(); ++i) {
            const uint64_t c = clients[i];
            const uint64_t d = devices[i];
            busy_clients_.insert(c);
            const ClientShard& shard = shards_[c];

            TrainConfig task_cfg = cfg_.train;
            task_cfg.seed = derive_seed(cfg_.seed, "train", round, c);
            ModelParams trained = local_train(received, shard, task_cfg, frozen, arch_);

            ModelParams upload = std::move(trained);
            if (cfg_.server.mode == ServerMode::kAsync) {
                for (size_t k = 0; k < upload.values.size(); ++k) {
                    upload.values[k] -= received.values[k];  // delta vs broadcast model
                }
            }
            auto upload_payload = encode(upload, cfg_.codec, &mask);

            Rng lat_rng = derive_rng(cfg_.seed, "latency", 0, send_counter_++);
            const double dt = response_time(
                pool_.capability(d), broadcast_payload.size(),
                shard.train_count * cfg_.train.local_epochs, cfg_.cost, lat_rng);

            SimEvent arrival;
            arrival.vt = now_ + dt;
            arrival.seq = queue_seq_++;
            arrival.kind = SimEvent::Kind::kResponseArrival;
            arrival.round = round;
            arrival.client_id = c;
            arrival.device_id = d;
            arrival.n_samples = shard.train_count;
            arrival.payload = std::move(upload_payload);
            queue_.push(std::move(arrival));

            LogEvent ev;
            ev.type = is_rebroadcast ? "rebroadcast" : "broadcast";
            ev.round = round;
            ev.client_id = c;
            ev.bytes = 23 + broadcast_payload.size();
            log_event(std::move(ev));
        }
    }

    void handle_arrival(SimEvent& e) {
        pool_.release(e.device_id);
        busy_clients_.erase(e.client_id);

        UpdateRecord update;
        update.client_id = e.client_id;
        update.params = decode(e.payload);
        update.upload_mask = update.params.layout.layer_names();
        update.n_samples = e.n_samples;
        update.origin_round = e.round;

        const ResponseStatus status = proc_.on_response(update);

        LogEvent ev;
        ev.type = "response";
        ev.round = e.round;
        ev.client_id = e.client_id;
        ev.bytes = 23 + e.payload.size();
        ev.n_samples = e.n_samples;
        ev.status = to_string(status);
        ev.payload_b64 = base64_encode(e.payload);
        log_event(std::move(ev));

        if (proc_.aggregation_fired()) after_aggregation();
        if (cfg_.server.mode == ServerMode::kAsync && !stopping_) refill_one();
    }

    void handle_timeout(SimEvent& e) {
        const size_t n_ava_now = available_now();
        const auto action = proc_.on_timeout_fire(e.round, e.generation, n_ava_now);
        if (!action) return;  // stale fire

        LogEvent ev;
        ev.type = "timeout";
        ev.round = e.round;
        ev.generation = e.generation;
        ev.n_ava = n_ava_now;
        ev.t_o_after = proc_.controller().current_timeout();
        log_event(std::move(ev));

        // Rebroadcast targets: available clients not already in this
        // round's broadcast set.
        std::vector<uint64_t> eligible;
        for (uint64_t c : free_clients()) {
            if (!proc_.round_state().ever_broadcast.count(c)) eligible.push_back(c);
        }
        Rng sel_rng = derive_rng(cfg_.seed, "select", e.round, e.generation + 1);
        const auto targets = sample_without_replacement(
            std::move(eligible), action->rebroadcast_allowance, sel_rng);
        proc_.on_rebroadcast(targets);
        do_broadcast(targets, e.round, true);

        SimEvent timer;
        timer.vt = now_ + action->next_deadline_delta;
        timer.seq = queue_seq_++;
        timer.kind = SimEvent::Kind::kTimeoutFire;
        timer.round = e.round;
        timer.generation = action->next_generation;
        queue_.push(timer);
    }

    double evaluate_global_val_acc() {
        double num = 0.0;
        double den = 0.0;
        for (const auto& shard : shards_) {
            const double acc = evaluate_accuracy(proc_.global(), shard, Split::kVal, arch_);
            num += acc * static_cast<double>(shard.n_samples);
            den += static_cast<double>(shard.n_samples);
        }
        return den > 0.0 ? num / den : 0.0;
    }

    void after_aggregation() {
        const uint64_t completed = proc_.current_round() - 1;
        const size_t n_updates = is_sync() ? cfg_.server.response_goal : cfg_.server.async_goal_K;

        LogEvent agg;
        agg.type = "aggregate";
        agg.round = completed;
        agg.n_updates = n_updates;
        agg.model_digest = sha256_hex(serialize_params(proc_.global()));
        log_event(std::move(agg));

        if (is_sync()) {
            queue_.cancel_stale_timers(proc_.current_round());
        } else {
            // Async has no round starts; re-roll transient dropout here.
            Rng drop_rng = derive_rng(cfg_.seed, "drop", proc_.current_round());
            pool_.roll_dropout(cfg_.drop_prob, drop_rng);
        }

        const double val_acc = evaluate_global_val_acc();
        LogEvent ev;
        ev.type = "eval";
        ev.round = completed;
        ev.val_acc = val_acc;
        log_event(std::move(ev));
        history_.push_back({completed, now_, val_acc});

        if (!has_best_ || val_acc > best_val_ + cfg_.min_delta) {
            has_best_ = true;
            best_val_ = val_acc;
            best_round_ = completed;
        } else if (completed - best_round_ >= cfg_.patience) {
            stopping_ = true;
        }
        if (proc_.completed_rounds() >= cfg_.server.max_rounds) stopping_ = true;

        if (!stopping_ && is_sync()) {
            SimEvent tick;
            tick.vt = now_;
            tick.seq = queue_seq_++;
            tick.kind = SimEvent::Kind::kRoundTick;
            queue_.push(tick);
        }
    }

    void refill_one() {
        const auto candidates = free_clients();
        if (candidates.empty() || available_now() == 0) return;
        Rng rng = derive_rng(cfg_.seed, "refill", 0, send_counter_);
        const auto targets = sample_without_replacement(candidates, 1, rng);
        do_broadcast(targets, proc_.current_round(), false);
    }

    SimResult finish() {
        SimResult result;
        result.inflight_at_end = queue_.pending_arrivals();

        if (history_.empty()) {
            throw ProtocolError("run ended before any aggregation; check the configuration");
        }
        const Convergence conv =
            detect_convergence(history_, cfg_.patience, cfg_.min_delta);

        // Final per-client evaluation on the test split; ft and fedbabu
        // fine-tune each client's copy before evaluating it.
        for (uint64_t c = 0; c < cfg_.total_clients; ++c) {
            const ClientShard& shard = shards_[c];
            ClientEval ev;
            ev.client_id = c;
            ev.n_samples = shard.n_samples;
            const auto it = proc_.contributions().find(c);
            ev.n_contrib = it == proc_.contributions().end() ? 0 : it->second;
            if (cfg_.algorithm == AlgorithmMode::kFedAvg) {
                ev.accuracy = evaluate_accuracy(proc_.global(), shard, Split::kTest, arch_);
            } else {
                TrainConfig ft_cfg = cfg_.train;
                ft_cfg.local_epochs = cfg_.finetune_epochs;
                ft_cfg.seed = derive_seed(cfg_.seed, "finetune", 0, c);
                const ModelParams personalized =
                    personalize_finetune(proc_.global(), shard, ft_cfg, arch_);
                ev.accuracy = evaluate_accuracy(personalized, shard, Split::kTest, arch_);
            }
            result.evals.push_back(ev);
        }

        MetricsReport report;
        report.acc_mean_weighted = weighted_mean_acc(result.evals);
        report.acc_bottom_decile = bottom_decile_acc(result.evals);
        report.acc_std = acc_std(result.evals);
        report.conv_round = conv.conv_round;
        report.t_conv_hours = conv.t_conv_hours;
        report.not_converged = conv.not_converged;
        const auto [total, rate] = traffic(events_, conv.t_conv_hours * 3600.0);
        report.total_bytes = total;
        report.net_traffic_bytes_per_s = rate;
        if (conv.t_conv_hours > 0.0) {
            const auto [um, us] = utilization(result.evals, conv.t_conv_hours);
            report.uti_mean = um;
            report.uti_std = us;
        }

        result.report = report;
        result.final_global = proc_.global();
        result.final_model_digest = sha256_hex(serialize_params(proc_.global()));
        result.history = history_;
        result.events = std::move(events_);
        result.completed_rounds = proc_.completed_rounds();
        result.virtual_time_s = now_;

        RunFooter footer;
        footer.final_model_digest = result.final_model_digest;
        footer.completed_rounds = result.completed_rounds;
        footer.virtual_time_s = result.virtual_time_s;
        footer.inflight_at_end = result.inflight_at_end;
        writer_.write_footer(footer);
        return result;
    }

    SimConfig cfg_;
    ModelArch arch_;
    std::vector<ClientShard> shards_;
    DevicePool pool_;
    ServerProcessor proc_;
    EventLogWriter writer_;
    SimQueue queue_;
    std::vector<LogEvent> events_;
    std::set<uint64_t> busy_clients_;
    std::vector<HistoryPoint> history_;
    double now_ = 0.0;
    uint64_t queue_seq_ = 0;
    uint64_t log_seq_ = 0;
    uint64_t batch_counter_ = 0;
    uint64_t send_counter_ = 0;
    bool stopping_ = false;
    bool has_best_ = false;
    double best_val_ = 0.0;
    uint64_t best_round_ = 0;
};

}  // namespace

SimResult run_simulation(const SimConfig& cfg, std::ostream& log_out) {
    cfg.validate();
    Simulation sim(cfg, log_out);
    return sim.run();
}

nlohmann::json sim_config_to_json(const SimConfig& cfg) {
    nlohmann::json j;
    j["total_clients"] = cfg.total_clients;
    j["availability_rate"] = cfg.availability_rate;
    j["seed"] = cfg.seed;
    switch (cfg.device_dist.kind) {
        case DeviceDistribution::Kind::kHomo:
            j["distribution"] = "homo";
            j["homo_index"] = cfg.device_dist.homo_index;
            break;
        case DeviceDistribution::Kind::kUniform:
            j["distribution"] = "uniform";
            break;
        case DeviceDistribution::Kind::kBetaBinomial:
            j["distribution"] = "beta_binomial";
            j["alpha"] = cfg.device_dist.alpha;
            j["beta"] = cfg.device_dist.beta;
            break;
    }
    j["n_participants"] = cfg.server.n_participants;
    j["response_goal"] = cfg.server.response_goal;
    j["over_selection_q"] = cfg.server.over_selection_q;
    j["timeout_t0_s"] = cfg.server.timeout_t0_s;
    j["timeout_delta_s"] = cfg.server.timeout_delta_s;
    j["timeout_k"] = cfg.server.timeout_k;
    j["timeout_floor_s"] = cfg.server.timeout_floor_s;
    j["mode"] = to_string(cfg.server.mode);
    j["async_goal_K"] = cfg.server.async_goal_K;
    j["max_rounds"] = cfg.server.max_rounds;
    j["staleness_max"] = cfg.server.staleness_max;
    j["server_lr"] = cfg.server.server_lr;
    j["n_classes"] = cfg.data.n_classes;
    j["dim"] = cfg.data.dim;
    j["samples_per_client"] = cfg.data.samples_per_client;
    j["data_alpha"] = cfg.data.dirichlet_alpha;
    j["hidden_width"] = cfg.hidden_width;
    j["learning_rate"] = cfg.train.learning_rate;
    j["local_epochs"] = cfg.train.local_epochs;
    j["batch_size"] = cfg.train.batch_size;
    j["finetune_epochs"] = cfg.finetune_epochs;
    j["codec"] = to_string(cfg.codec);
    j["algorithm"] = to_string(cfg.algorithm);
    j["base_per_sample_s"] = cfg.cost.base_per_sample_s;
    j["delay_scale"] = cfg.cost.delay_scale;
    j["drop_prob"] = cfg.drop_prob;
    j["patience"] = cfg.patience;
    j["min_delta"] = cfg.min_delta;
    return j;
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
    SimConfig cfg;
    cfg.total_clients = j.at("total_clients").get<size_t>();
    cfg.availability_rate = j.at("availability_rate").get<double>();
    cfg.seed = j.at("seed").get<uint64_t>();
    const std::string dist = j.at("distribution").get<std::string>();
    if (dist == "homo") {
        cfg.device_dist = DeviceDistribution::homo(j.at("homo_index").get<int>());
    } else if (dist == "uniform") {
        cfg.device_dist = DeviceDistribution::uniform();
    } else if (dist == "beta_binomial") {
        cfg.device_dist = DeviceDistribution::beta_binomial(j.at("alpha").get<double>(),
                                                            j.at("beta").get<double>());
    } else {
        throw ConfigError("unknown distribution '" + dist + "' in log header");
    }
    cfg.server.n_participants = j.at("n_participants").get<size_t>();
    cfg.server.response_goal = j.at("response_goal").get<size_t>();
    cfg.server.over_selection_q = j.at("over_selection_q").get<double>();
    cfg.server.timeout_t0_s = j.at("timeout_t0_s").get<double>();
    cfg.server.timeout_delta_s = j.at("timeout_delta_s").get<double>();
    cfg.server.timeout_k = j.at("timeout_k").get<size_t>();
    cfg.server.timeout_floor_s = j.at("timeout_floor_s").get<double>();
    cfg.server.mode = server_mode_from_string(j.at("mode").get<std::string>());
    cfg.server.async_goal_K = j.at("async_goal_K").get<size_t>();
    cfg.server.max_rounds = j.at("max_rounds").get<uint64_t>();
    cfg.server.staleness_max = j.at("staleness_max").get<uint64_t>();
    cfg.server.server_lr = j.at("server_lr").get<double>();
    cfg.data.n_clients = cfg.total_clients;
    cfg.data.n_classes = j.at("n_classes").get<size_t>();
    cfg.data.dim = j.at("dim").get<size_t>();
    cfg.data.samples_per_client = j.at("samples_per_client").get<size_t>();
    cfg.data.dirichlet_alpha = j.at("data_alpha").get<double>();
    cfg.hidden_width = j.at("hidden_width").get<size_t>();
    cfg.train.learning_rate = j.at("learning_rate").get<double>();
    cfg.train.local_epochs = j.at("local_epochs").get<size_t>();
    cfg.train.batch_size = j.at("batch_size").get<size_t>();
    cfg.finetune_epochs = j.at("finetune_epochs").get<size_t>();
    cfg.codec = codec_from_string(j.at("codec").get<std::string>());
    cfg.algorithm = algorithm_mode_from_string(j.at("algorithm").get<std::string>());
    cfg.cost.base_per_sample_s = j.at("base_per_sample_s").get<double>();
    cfg.cost.delay_scale = j.at("delay_scale").get<double>();
    cfg.drop_prob = j.at("drop_prob").get<double>();
    cfg.patience = j.at("patience").get<size_t>();
    cfg.min_delta = j.at("min_delta").get<double>();
    return cfg;
}

}  // namespace fsreal
