#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "fsreal/codec.hpp"
#include "fsreal/data.hpp"
#include "fsreal/device.hpp"
#include "fsreal/event_log.hpp"
#include "fsreal/metrics.hpp"
#include "fsreal/model.hpp"
#include "fsreal/server.hpp"
#include "fsreal/train.hpp"

namespace fsreal {

struct SimConfig {
    size_t total_clients = 100;      // N
    double availability_rate = 0.3;  // sets the per-round selection target n
    uint64_t seed = 1;
    DeviceDistribution device_dist = DeviceDistribution::uniform();
    ServerConfig server;
    DataConfig data;
    size_t hidden_width = 32;
    TrainConfig train;  // per-task seeds are derived from the run seed
    size_t finetune_epochs = 5;
    CodecKind codec = CodecKind::kNone;
    AlgorithmMode algorithm = AlgorithmMode::kFedAvg;
    CostParams cost;
    double drop_prob = 0.0;
    size_t patience = 20;
    double min_delta = 0.001;

    ModelArch arch() const { return {data.dim, hidden_width, data.n_classes}; }
    void validate() const;
};

// Virtual-time event. Dequeue order is (virtual_time, seq); seq breaks all
// ties deterministically.
struct SimEvent {
    enum class Kind { kBroadcastDue, kResponseArrival, kTimeoutFire, kRoundTick };

    double vt = 0.0;
    uint64_t seq = 0;
    Kind kind = Kind::kBroadcastDue;
    uint64_t round = 0;
    uint64_t generation = 0;           // timeout_fire
    uint64_t client_id = 0;            // response_arrival
    uint64_t device_id = 0;
    std::vector<uint8_t> payload;      // encoded upload
    uint64_t n_samples = 0;

    bool operator<(const SimEvent& other) const {
        if (vt != other.vt) return vt < other.vt;
        return seq < other.seq;
    }
};

class SimQueue {
public:
    void push(SimEvent e) { events_.insert(std::move(e)); }
    bool empty() const { return events_.empty(); }
    size_t size() const { return events_.size(); }

    SimEvent pop();

    // Removes timeout_fire events of rounds before `current_round`
    // (their rounds have completed); returns how many were removed.
    size_t cancel_stale_timers(uint64_t current_round);

    // Remaining scheduled arrivals; used for end-of-run accounting.
    size_t pending_arrivals() const;

private:
    std::set<SimEvent> events_;
};

struct SimResult {
    MetricsReport report;
    ModelParams final_global;
    std::string final_model_digest;
    std::vector<HistoryPoint> history;
    std::vector<ClientEval> evals;
    std::vector<LogEvent> events;
    uint64_t completed_rounds = 0;
    double virtual_time_s = 0.0;
    uint64_t inflight_at_end = 0;
};

// Runs the full federation on virtual time and streams the event log to
// `log_out`. Local training runs eagerly at broadcast time; only its cost
// is charged as virtual seconds. Identical (config, seed) gives identical
// output, byte for byte.
SimResult run_simulation(const SimConfig& cfg, std::ostream& log_out);

// Config snapshot embedded in the event-log header (also what `replay`
// uses to rebuild the run).
nlohmann::json sim_config_to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(const nlohmann::json& j);

}  // namespace fsreal
