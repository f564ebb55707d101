#include "fsreal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fsreal/errors.hpp"

namespace fsreal {

double weighted_mean_acc(const std::vector<ClientEval>& evals) {
    if (evals.empty()) throw MetricError("weighted_mean_acc: no client evaluations");
    uint64_t total = 0;
    for (const auto& e : evals) total += e.n_samples;
    if (total == 0) throw MetricError("weighted_mean_acc: zero total samples");
    // Weights as ratios n_i/total, so uniform scaling of the n_i leaves
    // the result bit-identical.
    double acc = 0.0;
    for (const auto& e : evals) {
        acc += e.accuracy *
               (static_cast<double>(e.n_samples) / static_cast<double>(total));
    }
    return acc;
}

double bottom_decile_acc(const std::vector<ClientEval>& evals) {
    if (evals.empty()) throw MetricError("bottom_decile_acc: no client evaluations");
    std::vector<double> accs;
    accs.reserve(evals.size());
    for (const auto& e : evals) accs.push_back(e.accuracy);
    std::sort(accs.begin(), accs.end());
    const size_t m = accs.size();
    const size_t rank = static_cast<size_t>(std::ceil(0.1 * static_cast<double>(m)));
    return accs[std::max<size_t>(rank, 1) - 1];
}

double acc_std(const std::vector<ClientEval>& evals) {
    if (evals.empty()) throw MetricError("acc_std: no client evaluations");
    double mean = 0.0;
    for (const auto& e : evals) mean += e.accuracy;
    mean /= static_cast<double>(evals.size());
    double var = 0.0;
    for (const auto& e : evals) {
        const double d = e.accuracy - mean;
        var += d * d;
    }
    return std::sqrt(var / static_cast<double>(evals.size()));
}

Convergence detect_convergence(const std::vector<HistoryPoint>& history, size_t patience,
                               double min_delta) {
    if (history.empty()) throw MetricError("detect_convergence: empty history");

    double best = history.front().weighted_val_acc;
    size_t best_i = 0;
    for (size_t i = 1; i < history.size(); ++i) {
        if (history[i].weighted_val_acc > best + min_delta) {
            best = history[i].weighted_val_acc;
            best_i = i;
        } else if (history[i].round - history[best_i].round >= patience) {
            return {history[best_i].round, history[best_i].virtual_time_s / 3600.0, false};
        }
    }
    // Never settled within the run: report the last round, flagged.
    return {history.back().round, history.back().virtual_time_s / 3600.0, true};
}

std::pair<double, double> utilization(const std::vector<ClientEval>& evals,
                                      double t_conv_hours) {
    if (!(t_conv_hours > 0.0)) throw MetricError("utilization: t_conv must be > 0");
    if (evals.empty()) throw MetricError("utilization: no client evaluations");
    std::vector<double> u;
    u.reserve(evals.size());
    for (const auto& e : evals) {
        u.push_back(static_cast<double>(e.n_contrib) / t_conv_hours);
    }
    double mean = 0.0;
    for (double v : u) mean += v;
    mean /= static_cast<double>(u.size());
    double var = 0.0;
    for (double v : u) {
        const double d = v - mean;
        var += d * d;
    }
    return {mean, std::sqrt(var / static_cast<double>(u.size()))};
}

std::pair<uint64_t, double> traffic(const std::vector<LogEvent>& events,
                                    double t_conv_seconds) {
    uint64_t total = 0;
    for (const auto& e : events) {
        if (e.type == "broadcast" || e.type == "rebroadcast" || e.type == "response") {
            total += e.bytes;
        }
    }
    const double rate = t_conv_seconds > 0.0 ? static_cast<double>(total) / t_conv_seconds : 0.0;
    return {total, rate};
}

std::string csv_header() {
    return "label,seed,mode,algorithm,codec,distribution,acc_mean_weighted,"
           "acc_bottom_decile,acc_std,t_conv_hours,conv_round,not_converged,total_bytes,"
           "net_traffic_bytes_per_s,uti_mean,uti_std";
}

std::string to_csv_row(const MetricsRow& row) {
    std::ostringstream out;
    out.precision(12);
    const auto& r = row.report;
    out << row.label << ',' << row.seed << ',' << row.mode << ',' << row.algorithm << ','
        << row.codec << ',' << row.distribution << ',' << r.acc_mean_weighted << ','
        << r.acc_bottom_decile << ',' << r.acc_std << ',' << r.t_conv_hours << ','
        << r.conv_round << ',' << (r.not_converged ? 1 : 0) << ',' << r.total_bytes << ','
        << r.net_traffic_bytes_per_s << ',' << r.uti_mean << ',' << r.uti_std;
    return out.str();
}

}  // namespace fsreal
