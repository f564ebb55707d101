#include "fsreal/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "fsreal/errors.hpp"
#include "fsreal/metrics.hpp"

namespace fs = std::filesystem;

namespace fsreal {

ReportSummary aggregate_metrics_csvs(const std::string& in_dir, const std::string& out_path) {
    std::vector<std::string> header_cols;
    {
        std::istringstream h(csv_header());
        std::string col;
        while (std::getline(h, col, ',')) header_cols.push_back(col);
    }
    const size_t first_metric = 6;  // label,seed,mode,algorithm,codec,distribution

    std::map<std::string, std::vector<std::vector<double>>> groups;
    size_t files = 0;
    size_t rows_read = 0;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        if (entry.path().extension() != ".csv") continue;
        std::ifstream in(entry.path());
        if (!in) continue;
        ++files;
        std::string line;
        if (!std::getline(in, line)) continue;
        if (line != csv_header()) {
            throw IoError("unexpected CSV header in '" + entry.path().string() + "'");
        }
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<std::string> cells;
            std::istringstream row(line);
            std::string cell;
            while (std::getline(row, cell, ',')) cells.push_back(cell);
            if (cells.size() != header_cols.size()) {
                throw IoError("malformed row in '" + entry.path().string() + "': " + line);
            }
            // Group key is the configuration identity, minus the seed.
            const std::string key = cells[0] + "," + cells[2] + "," + cells[3] + "," +
                                    cells[4] + "," + cells[5];
            std::vector<double> metrics;
            for (size_t i = first_metric; i < cells.size(); ++i) {
                metrics.push_back(std::stod(cells[i]));
            }
            groups[key].push_back(std::move(metrics));
            ++rows_read;
        }
    }
    if (files == 0) throw IoError("no .csv files found in '" + in_dir + "'");

    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open '" + out_path + "' for writing");
    out << "label,mode,algorithm,codec,distribution,n_runs";
    for (size_t i = first_metric; i < header_cols.size(); ++i) {
        out << ',' << header_cols[i] << "_mean," << header_cols[i] << "_std";
    }
    out << "\n";
    out.precision(12);
    for (const auto& [key, rows] : groups) {
        out << key << ',' << rows.size();
        const size_t n_metrics = rows.front().size();
        for (size_t m = 0; m < n_metrics; ++m) {
            double mean = 0.0;
            for (const auto& r : rows) mean += r[m];
            mean /= static_cast<double>(rows.size());
            double var = 0.0;
            for (const auto& r : rows) var += (r[m] - mean) * (r[m] - mean);
            var /= static_cast<double>(rows.size());
            out << ',' << mean << ',' << std::sqrt(var);
        }
        out << "\n";
    }
    return {groups.size(), rows_read};
}

}  // namespace fsreal
