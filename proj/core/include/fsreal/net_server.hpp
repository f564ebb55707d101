#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "fsreal/sim.hpp"

namespace fsreal {

struct ServeOptions {
    std::string host = "127.0.0.1";
    uint16_t port = 0;  // 0 picks an ephemeral port; the bound port is printed
    double latency_inject_s = 0.0;
};

struct ServeResult {
    MetricsReport report;
    std::string final_model_digest;
    uint64_t completed_rounds = 0;
    double elapsed_s = 0.0;
    std::vector<ClientEval> evals;
    std::vector<LogEvent> events;
};

// Runs the FL server over real sockets. Waits for all cfg.total_clients
// clients to say hello, then drives the same ServerProcessor the
// simulation uses: socket reader threads are the transmitters, this call's
// thread is the single processor. Event-log timestamps are real seconds
// since start.
ServeResult run_server(const SimConfig& cfg, const ServeOptions& opts,
                       std::ostream& log_out);

}  // namespace fsreal
