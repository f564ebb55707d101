#include "fsreal/server.hpp"

#include <algorithm>
#include <cmath>

#include "fsreal/errors.hpp"

namespace fsreal {

ServerMode server_mode_from_string(const std::string& s) {
    if (s == "sync") return ServerMode::kSync;
    if (s == "async") return ServerMode::kAsync;
    throw ConfigError("unknown server mode '" + s + "' (expected sync or async)");
}

std::string to_string(ServerMode mode) {
    return mode == ServerMode::kSync ? "sync" : "async";
}

void ServerConfig::validate(size_t total_clients) const {
    if (n_participants < 1) throw ConfigError("n_participants must be >= 1");
    if (response_goal < 1) throw ConfigError("response_goal must be >= 1");
    if (response_goal > n_participants) {
        throw ConfigError("response_goal (n') must not exceed n_participants (n)");
    }
    if (n_participants > total_clients) {
        throw ConfigError("n_participants must not exceed the total number of clients");
    }
    if (over_selection_q < 1.0) throw ConfigError("over_selection_q must be >= 1");
    if (over_selection_q * static_cast<double>(n_participants) <
        static_cast<double>(response_goal)) {
        throw ConfigError("over_selection_q * n must be >= response_goal");
    }
    if (!(timeout_t0_s > 0.0)) throw ConfigError("timeout_t0_s must be > 0");
    if (timeout_delta_s < 0.0) throw ConfigError("timeout_delta_s must be >= 0");
    if (timeout_k < 1) throw ConfigError("timeout_k must be >= 1");
    if (!(timeout_floor_s > 0.0)) throw ConfigError("timeout_floor_s must be > 0");
    if (mode == ServerMode::kAsync && async_goal_K < 1) {
        throw ConfigError("async_goal_K must be >= 1");
    }
    if (max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
}

size_t select_broadcast_count(size_t n, double q, size_t n_ava) {
    // Small epsilon so q*n lands on the intended integer despite FP error.
    const auto target = static_cast<size_t>(
        std::floor(q * static_cast<double>(n) + 1e-9));
    return std::min(n_ava, target);
}

size_t rebroadcast_count(size_t n, size_t n_ava_now) {
    const size_t surplus = n_ava_now > n ? n_ava_now - n : 0;
    return std::min(n, surplus);
}

TimeoutController::TimeoutController(double t0_s, double floor_s)
    : t0_(std::max(t0_s, floor_s)), floor_(floor_s) {}

double TimeoutController::on_timeout() {
    const double deadline_delta = t0_;
    t0_ *= 2.0;
    clean_ = 0;
    return deadline_delta;
}

void TimeoutController::on_round_complete(bool had_rebroadcast, size_t k, double delta_s) {
    if (had_rebroadcast) {
        clean_ = 0;
        return;
    }
    ++clean_;
    if (clean_ >= k) {
        t0_ = std::max(floor_, t0_ - delta_s);
        clean_ = 0;
    }
}

std::string to_string(ResponseStatus s) {
    switch (s) {
        case ResponseStatus::kAccepted: return "accepted";
        case ResponseStatus::kDuplicate: return "duplicate";
        case ResponseStatus::kLate: return "late";
        case ResponseStatus::kBuffered: return "buffered";
        case ResponseStatus::kAggregated: return "aggregated";
        case ResponseStatus::kDiscardedStale: return "discarded_stale";
    }
    return "?";
}

ServerProcessor::ServerProcessor(ServerConfig cfg, ModelParams initial_global)
    : cfg_(cfg),
      global_(std::move(initial_global)),
      ctrl_(cfg.timeout_t0_s, cfg.timeout_floor_s) {}

void ServerProcessor::on_broadcast(uint64_t round, const std::vector<uint64_t>& client_ids) {
    if (cfg_.mode == ServerMode::kAsync) {
        // Async rounds advance on aggregation; broadcasts just mark tasks.
        return;
    }
    if (round != round_.round_index) {
        throw ProtocolError("broadcast for round " + std::to_string(round) +
                            " but current round is " + std::to_string(round_.round_index));
    }
    // Callers may register the round's targets in one batch or one at a
    // time (the replay reader sees one log line per recipient).
    for (uint64_t id : client_ids) {
        round_.broadcast_set.insert(id);
        round_.ever_broadcast.insert(id);
    }
}

void ServerProcessor::on_rebroadcast(const std::vector<uint64_t>& client_ids) {
    if (cfg_.mode == ServerMode::kAsync) return;
    for (uint64_t id : client_ids) round_.ever_broadcast.insert(id);
}

ResponseStatus ServerProcessor::on_response(const UpdateRecord& update) {
    aggregation_fired_ = false;
    if (update.origin_round > round_.round_index) {
        throw ProtocolError("response from future round " + std::to_string(update.origin_round));
    }

    if (cfg_.mode == ServerMode::kAsync) {
        const uint64_t staleness = round_.round_index - update.origin_round;
        if (staleness > cfg_.staleness_max) return ResponseStatus::kDiscardedStale;
        async_buffer_.push_back(update);
        if (async_buffer_.size() >= cfg_.async_goal_K) {
            fire_async_aggregation();
            return ResponseStatus::kAggregated;
        }
        return ResponseStatus::kBuffered;
    }

    // Sync path: only current-round responses from broadcast members count.
    if (update.origin_round < round_.round_index || round_.aggregated) {
        return ResponseStatus::kLate;
    }
    if (!round_.ever_broadcast.count(update.client_id)) {
        throw ProtocolError("response from client " + std::to_string(update.client_id) +
                            " which was not broadcast to in round " +
                            std::to_string(round_.round_index));
    }
    if (round_.responded_ids.count(update.client_id)) return ResponseStatus::kDuplicate;

    round_.responded_ids.insert(update.client_id);
    round_.responded.push_back(update);
    if (round_.responded.size() >= cfg_.response_goal) fire_sync_aggregation();
    return ResponseStatus::kAccepted;
}

void ServerProcessor::fire_sync_aggregation() {
    // Exactly the first n' accepted updates, in arrival order.
    std::vector<UpdateRecord> batch(round_.responded.begin(),
                                    round_.responded.begin() +
                                        static_cast<long>(cfg_.response_goal));
    global_ = fedavg_aggregate(batch, global_);
    for (const auto& u : batch) ++contributions_[u.client_id];

    round_.aggregated = true;
    ctrl_.on_round_complete(round_.rebroadcasts_this_round > 0, cfg_.timeout_k,
                            cfg_.timeout_delta_s);
    ++completed_rounds_;
    aggregation_fired_ = true;

    const uint64_t next = round_.round_index + 1;
    round_ = RoundState{};
    round_.round_index = next;
}

void ServerProcessor::fire_async_aggregation() {
    global_ = fedbuff_aggregate(global_, async_buffer_, cfg_.server_lr, round_.round_index);
    for (const auto& u : async_buffer_) ++contributions_[u.client_id];
    async_buffer_.clear();
    ++completed_rounds_;
    ++round_.round_index;
    aggregation_fired_ = true;
}

std::optional<ServerProcessor::TimeoutAction> ServerProcessor::on_timeout_fire(
    uint64_t round, uint64_t generation, size_t n_ava_now) {
    if (cfg_.mode == ServerMode::kAsync) return std::nullopt;  // no deadlines in async
    if (round != round_.round_index || round_.aggregated) return std::nullopt;
    if (generation != round_.rebroadcasts_this_round) return std::nullopt;
    if (round_.responded.size() >= cfg_.response_goal) return std::nullopt;

    TimeoutAction action;
    action.next_deadline_delta = ctrl_.on_timeout();
    ++round_.rebroadcasts_this_round;
    action.next_generation = round_.rebroadcasts_this_round;
    action.rebroadcast_allowance = rebroadcast_count(cfg_.n_participants, n_ava_now);
    return action;
}

}  // namespace fsreal
