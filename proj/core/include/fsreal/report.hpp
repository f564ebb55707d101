#pragma once

#include <cstddef>
#include <string>

namespace fsreal {

struct ReportSummary {
    size_t configurations = 0;
    size_t rows = 0;
};

// Reads every metrics CSV in `in_dir`, groups rows by configuration
// (label, mode, algorithm, codec, distribution), and writes one row per
// group with mean and population std of each metric column.
ReportSummary aggregate_metrics_csvs(const std::string& in_dir, const std::string& out_path);

}  // namespace fsreal
