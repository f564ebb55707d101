#pragma once

#include <string>

namespace fsreal {

struct ReplayResult {
    bool ok = false;
    std::string message;  // first mismatch when !ok
    std::string recomputed_final_digest;
    uint64_t completed_rounds = 0;
};

// Feeds a recorded event log back through the pure server processor and
// verifies that every aggregate digest, every response verdict, and the
// footer's final-model digest reproduce exactly. Tampering (a flipped
// payload byte, a dropped event, an edited digest) surfaces as a mismatch.
ReplayResult replay_event_log(const std::string& path);

}  // namespace fsreal
