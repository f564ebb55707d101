#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fsreal/event_log.hpp"

namespace fsreal {

struct ClientEval {
    uint64_t client_id = 0;
    double accuracy = 0.0;
    uint64_t n_samples = 0;  // local data size, used as the accuracy weight
    uint64_t n_contrib = 0;  // times counted into an aggregation
};

struct MetricsReport {
    double acc_mean_weighted = 0.0;
    double acc_bottom_decile = 0.0;
    double acc_std = 0.0;
    double t_conv_hours = 0.0;
    uint64_t conv_round = 0;
    bool not_converged = false;
    uint64_t total_bytes = 0;
    double net_traffic_bytes_per_s = 0.0;
    double uti_mean = 0.0;
    double uti_std = 0.0;
};

// sum(acc_i * n_i) / sum(n_i)
double weighted_mean_acc(const std::vector<ClientEval>& evals);

// Nearest-rank 10th percentile: the ceil(0.1*m)-th smallest accuracy.
double bottom_decile_acc(const std::vector<ClientEval>& evals);

// Population standard deviation of per-client accuracies (unweighted).
double acc_std(const std::vector<ClientEval>& evals);

struct HistoryPoint {
    uint64_t round = 0;
    double virtual_time_s = 0.0;
    double weighted_val_acc = 0.0;
};

struct Convergence {
    uint64_t conv_round = 0;
    double t_conv_hours = 0.0;
    bool not_converged = false;
};

// Patience-based detector: conv_round is the round of the best validation
// accuracy once no later round improves it by more than min_delta within
// `patience` rounds. Runs that never settle report the last round with
// not_converged set.
Convergence detect_convergence(const std::vector<HistoryPoint>& history, size_t patience,
                               double min_delta);

// Per-client contributions per hour; mean and population std over every
// client, zero-contribution clients included.
std::pair<double, double> utilization(const std::vector<ClientEval>& evals,
                                      double t_conv_hours);

// Total bytes of every sent message (broadcasts, rebroadcasts, and all
// responses including late/dropped ones) and bytes per second of
// convergence time.
std::pair<uint64_t, double> traffic(const std::vector<LogEvent>& events,
                                    double t_conv_seconds);

// One CSV row per run; `csv_header()` documents the column order.
struct MetricsRow {
    std::string label;
    uint64_t seed = 0;
    std::string mode;
    std::string algorithm;
    std::string codec;
    std::string distribution;
    MetricsReport report;
};

std::string csv_header();
std::string to_csv_row(const MetricsRow& row);

}  // namespace fsreal
