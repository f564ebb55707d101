#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fsreal/aggregate.hpp"
#include "fsreal/model.hpp"

namespace fsreal {

enum class ServerMode { kSync, kAsync };

ServerMode server_mode_from_string(const std::string& s);
std::string to_string(ServerMode mode);

struct ServerConfig {
    size_t n_participants = 1;       // n: selection target per round
    size_t response_goal = 1;        // n': responses required to aggregate (sync)
    double over_selection_q = 1.5;   // q: broadcast to min(n_ava, floor(q*n))
    double timeout_t0_s = 60.0;
    double timeout_delta_s = 5.0;
    size_t timeout_k = 3;            // clean rounds before subtracting delta
    double timeout_floor_s = 1.0;
    ServerMode mode = ServerMode::kSync;
    size_t async_goal_K = 1;         // buffer size that triggers async aggregation
    uint64_t max_rounds = 200;
    uint64_t staleness_max = 100;    // async rounds tick fast; tolerate deep staleness
    double server_lr = 1.0;

    void validate(size_t total_clients) const;
};

// Number of clients the server broadcasts to: min(n_ava, floor(q*n)).
size_t select_broadcast_count(size_t n, double q, size_t n_ava);

// Rebroadcast allowance when a timeout fires: min(n, max(n_ava - n, 0)).
size_t rebroadcast_count(size_t n, size_t n_ava_now);

// AIMD timeout budget: doubles on each triggered rebroadcast, loses
// delta_t after k consecutive clean rounds, never drops below the floor.
class TimeoutController {
public:
    TimeoutController() = default;
    TimeoutController(double t0_s, double floor_s);

    double current_timeout() const { return t0_; }
    size_t clean_rounds() const { return clean_; }

    // Returns the deadline delta for the reset timer. The reset uses the
    // pre-doubling budget; the doubled value applies from the next arming.
    double on_timeout();

    void on_round_complete(bool had_rebroadcast, size_t k, double delta_s);

private:
    double t0_ = 60.0;
    double floor_ = 1.0;
    size_t clean_ = 0;
};

struct RoundState {
    uint64_t round_index = 0;
    std::set<uint64_t> broadcast_set;    // initial targets
    std::set<uint64_t> ever_broadcast;   // initial + rebroadcast targets
    std::vector<UpdateRecord> responded; // accepted, in arrival order
    std::set<uint64_t> responded_ids;
    size_t rebroadcasts_this_round = 0;  // doubles as the live timer generation
    bool aggregated = false;
};

enum class ResponseStatus {
    kAccepted,
    kDuplicate,
    kLate,
    kBuffered,
    kAggregated,       // async: this response filled the buffer
    kDiscardedStale,
};

std::string to_string(ResponseStatus s);

// The deterministic message processor: a pure fold over the ordered event
// sequence (broadcasts, responses, timeout fires). Transmitters (the
// simulation loop, socket handlers, or the replay reader) produce events;
// exactly one processor instance consumes them. Selection, timing, and
// I/O live with the caller.
class ServerProcessor {
public:
    ServerProcessor(ServerConfig cfg, ModelParams initial_global);

    const ServerConfig& config() const { return cfg_; }
    const ModelParams& global() const { return global_; }
    const TimeoutController& controller() const { return ctrl_; }
    const RoundState& round_state() const { return round_; }
    uint64_t current_round() const { return round_.round_index; }

    // Sync: opens round `round` with its initial broadcast targets.
    // Async: records targets for bookkeeping only.
    void on_broadcast(uint64_t round, const std::vector<uint64_t>& client_ids);
    void on_rebroadcast(const std::vector<uint64_t>& client_ids);

    // Feeds one client response. Sets aggregation_fired() when this
    // response completed a sync round or filled the async buffer.
    ResponseStatus on_response(const UpdateRecord& update);

    struct TimeoutAction {
        size_t rebroadcast_allowance = 0;  // min(n, max(n_ava_now - n, 0))
        double next_deadline_delta = 0.0;  // pre-doubling t_o for the reset timer
        uint64_t next_generation = 0;
    };

    // Timeout fire for (round, generation). Returns the action when the
    // fire is still live, nullopt when stale. A live fire doubles t_o and
    // bumps the timer generation even if the allowance is zero.
    std::optional<TimeoutAction> on_timeout_fire(uint64_t round, uint64_t generation,
                                                 size_t n_ava_now);

    bool aggregation_fired() const { return aggregation_fired_; }
    uint64_t completed_rounds() const { return completed_rounds_; }

    // Times each client's update was consumed by an aggregation.
    const std::map<uint64_t, uint64_t>& contributions() const { return contributions_; }

    size_t async_buffer_size() const { return async_buffer_.size(); }

private:
    void fire_sync_aggregation();
    void fire_async_aggregation();

    ServerConfig cfg_;
    ModelParams global_;
    TimeoutController ctrl_;
    RoundState round_;
    std::vector<UpdateRecord> async_buffer_;
    std::map<uint64_t, uint64_t> contributions_;
    bool aggregation_fired_ = false;
    uint64_t completed_rounds_ = 0;
};

}  // namespace fsreal
