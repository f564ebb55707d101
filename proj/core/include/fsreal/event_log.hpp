#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace fsreal {

// One JSON-lines record. Every event carries (ts, seq, type); the other
// fields depend on the type:
//   broadcast/rebroadcast: round, client_id, bytes
//   response:              round (origin), client_id, bytes, n_samples,
//                          status, payload_b64
//   timeout:               round, generation, n_ava, t_o_after
//   aggregate:             round, n_updates, model_digest
//   eval:                  round, val_acc
struct LogEvent {
    double ts = 0.0;
    uint64_t seq = 0;
    std::string type;
    uint64_t round = 0;
    uint64_t client_id = 0;
    uint64_t bytes = 0;
    uint64_t n_samples = 0;
    std::string status;
    std::string payload_b64;
    uint64_t generation = 0;
    uint64_t n_ava = 0;
    double t_o_after = 0.0;
    uint64_t n_updates = 0;
    std::string model_digest;
    double val_acc = 0.0;

    nlohmann::json to_json() const;
    static LogEvent from_json(const nlohmann::json& j);
};

struct RunFooter {
    std::string final_model_digest;
    uint64_t completed_rounds = 0;
    double virtual_time_s = 0.0;
    uint64_t inflight_at_end = 0;
};

// Streams header, events, and footer as one JSON object per line.
class EventLogWriter {
public:
    explicit EventLogWriter(std::ostream& out) : out_(&out) {}

    void write_header(const nlohmann::json& config, uint64_t seed);
    void write(const LogEvent& event);
    void write_footer(const RunFooter& footer);

private:
    std::ostream* out_;
};

struct ParsedLog {
    nlohmann::json header;
    std::vector<LogEvent> events;
    RunFooter footer;
    bool has_footer = false;
};

ParsedLog read_event_log(const std::string& path);

}  // namespace fsreal
