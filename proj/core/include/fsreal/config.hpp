#pragma once

#include <string>
#include <vector>

#include "fsreal/sim.hpp"

namespace fsreal {

// One experiment file fully determines a set of runs (one per seed).
struct ExperimentConfig {
    SimConfig sim;  // sim.seed is overwritten per run from `seeds`
    std::vector<uint64_t> seeds = {1};
    std::string label;
    double latency_inject_s = 0.0;   // distributed-mode test hook
    bool timeout_explicit = false;   // true when the file set timeout_t0_s
};

// Parses a flat TOML-style key/value file with a strict schema: unknown
// keys are rejected (with a closest-key suggestion), parse errors carry
// line numbers, and all defaults are applied before cross-field
// validation. See README for the key reference.
ExperimentConfig load_config(const std::string& path);

// Same loader over in-memory text; `source` names the input in errors.
ExperimentConfig load_config_text(const std::string& text, const std::string& source);

}  // namespace fsreal
