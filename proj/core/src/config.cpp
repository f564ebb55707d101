#include "fsreal/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <variant>

#include "fsreal/errors.hpp"

namespace fsreal {

namespace {

struct RawValue {
    std::variant<int64_t, double, std::string, bool, std::vector<int64_t>> value;
    size_t line = 0;
};

using RawMap = std::map<std::string, RawValue>;

std::string trim(const std::string& s) {
    size_t a = 0;
    size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void parse_fail(const std::string& source, size_t line, const std::string& msg) {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + msg);
}

int64_t parse_int(const std::string& text, const std::string& source, size_t line) {
    try {
        size_t pos = 0;
        const int64_t v = std::stoll(text, &pos);
        if (pos != text.size()) parse_fail(source, line, "bad integer '" + text + "'");
        return v;
    } catch (const std::exception&) {
        parse_fail(source, line, "bad integer '" + text + "'");
    }
}

double parse_float(const std::string& text, const std::string& source, size_t line) {
    try {
        size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) parse_fail(source, line, "bad number '" + text + "'");
        return v;
    } catch (const std::exception&) {
        parse_fail(source, line, "bad number '" + text + "'");
    }
}

RawValue parse_value(const std::string& text, const std::string& source, size_t line) {
    RawValue out;
    out.line = line;
    if (text.empty()) parse_fail(source, line, "missing value");
    if (text.front() == '"') {
        if (text.size() < 2 || text.back() != '"') {
            parse_fail(source, line, "unterminated string");
        }
        out.value = text.substr(1, text.size() - 2);
        return out;
    }
    if (text == "true") {
        out.value = true;
        return out;
    }
    if (text == "false") {
        out.value = false;
        return out;
    }
    if (text.front() == '[') {
        if (text.back() != ']') parse_fail(source, line, "unterminated array");
        std::vector<int64_t> items;
        std::string inner = text.substr(1, text.size() - 2);
        std::stringstream ss(inner);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) parse_fail(source, line, "empty array element");
            items.push_back(parse_int(item, source, line));
        }
        out.value = std::move(items);
        return out;
    }
    if (text.find('.') != std::string::npos || text.find('e') != std::string::npos ||
        text.find('E') != std::string::npos) {
        out.value = parse_float(text, source, line);
    } else {
        out.value = parse_int(text, source, line);
    }
    return out;
}

// Strips a trailing comment that starts outside any string literal.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

RawMap parse_toml_subset(const std::string& text, const std::string& source) {
    RawMap out;
    std::stringstream ss(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            parse_fail(source, line_no, "sections are not supported; use flat keys");
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            parse_fail(source, line_no, "expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) parse_fail(source, line_no, "empty key");
        if (out.count(key)) parse_fail(source, line_no, "duplicate key '" + key + "'");
        out[key] = parse_value(trim(line.substr(eq + 1)), source, line_no);
    }
    return out;
}

size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<size_t> prev(b.size() + 1);
    std::vector<size_t> cur(b.size() + 1);
    for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= b.size(); ++j) {
            const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "total_clients", "distribution", "homo_index", "alpha", "beta",
        "availability_rate", "n_participants", "response_goal", "over_selection_q",
        "timeout_t0_s", "timeout_delta_s", "timeout_k", "timeout_floor_s", "mode",
        "async_goal_K", "staleness_max", "max_rounds", "server_lr", "algorithm", "codec",
        "learning_rate", "batch_size", "local_epochs", "finetune_epochs", "hidden_width",
        "n_classes", "dim", "samples_per_client", "data_alpha", "base_per_sample_s",
        "delay_scale", "drop_prob", "patience", "min_delta", "seeds", "label",
        "latency_inject_s",
    };
    return keys;
}

class ConfigReader {
public:
    ConfigReader(RawMap raw, std::string source)
        : raw_(std::move(raw)), source_(std::move(source)) {
        for (const auto& [key, value] : raw_) {
            if (std::find(known_keys().begin(), known_keys().end(), key) ==
                known_keys().end()) {
                std::string best;
                size_t best_d = SIZE_MAX;
                for (const auto& k : known_keys()) {
                    const size_t d = edit_distance(key, k);
                    if (d < best_d) {
                        best_d = d;
                        best = k;
                    }
                }
                std::string msg = source_ + ":" + std::to_string(value.line) +
                                  ": unknown key '" + key + "'";
                if (best_d <= 4) msg += " (did you mean '" + best + "'?)";
                throw ConfigError(msg);
            }
        }
    }

    bool has(const std::string& key) const { return raw_.count(key) > 0; }

    int64_t get_int(const std::string& key, int64_t def) const {
        const auto it = raw_.find(key);
        if (it == raw_.end()) return def;
        if (const auto* v = std::get_if<int64_t>(&it->second.value)) return *v;
        fail_type(key, it->second.line, "an integer");
    }

    int64_t require_int(const std::string& key) const {
        if (!has(key)) throw ConfigError(source_ + ": missing required key '" + key + "'");
        return get_int(key, 0);
    }

    double get_float(const std::string& key, double def) const {
        const auto it = raw_.find(key);
        if (it == raw_.end()) return def;
        if (const auto* v = std::get_if<double>(&it->second.value)) return *v;
        if (const auto* v = std::get_if<int64_t>(&it->second.value)) {
            return static_cast<double>(*v);
        }
        fail_type(key, it->second.line, "a number");
    }

    double require_float(const std::string& key) const {
        if (!has(key)) throw ConfigError(source_ + ": missing required key '" + key + "'");
        return get_float(key, 0.0);
    }

    std::string get_string(const std::string& key, const std::string& def) const {
        const auto it = raw_.find(key);
        if (it == raw_.end()) return def;
        if (const auto* v = std::get_if<std::string>(&it->second.value)) return *v;
        fail_type(key, it->second.line, "a string");
    }

    std::string require_string(const std::string& key) const {
        if (!has(key)) throw ConfigError(source_ + ": missing required key '" + key + "'");
        return get_string(key, "");
    }

    std::vector<int64_t> get_array(const std::string& key,
                                   const std::vector<int64_t>& def) const {
        const auto it = raw_.find(key);
        if (it == raw_.end()) return def;
        if (const auto* v = std::get_if<std::vector<int64_t>>(&it->second.value)) return *v;
        fail_type(key, it->second.line, "an array of integers");
    }

private:
    [[noreturn]] void fail_type(const std::string& key, size_t line,
                                const std::string& expected) const {
        throw ConfigError(source_ + ":" + std::to_string(line) + ": key '" + key +
                          "' must be " + expected);
    }

    RawMap raw_;
    std::string source_;
};

std::string label_from_path(const std::string& path) {
    size_t start = path.find_last_of("/\\");
    start = start == std::string::npos ? 0 : start + 1;
    size_t end = path.rfind('.');
    if (end == std::string::npos || end <= start) end = path.size();
    return path.substr(start, end - start);
}

}  // namespace

ExperimentConfig load_config_text(const std::string& text, const std::string& source) {
    const ConfigReader r(parse_toml_subset(text, source), source);
    ExperimentConfig out;
    SimConfig& sim = out.sim;

    sim.total_clients = static_cast<size_t>(r.require_int("total_clients"));

    const std::string dist = r.require_string("distribution");
    if (dist == "homo") {
        sim.device_dist = DeviceDistribution::homo(
            static_cast<int>(r.get_int("homo_index", 36)));
        if (sim.device_dist.homo_index < 0 || sim.device_dist.homo_index > 71) {
            throw ConfigError("homo_index must be in [0, 71]");
        }
    } else if (dist == "uniform") {
        sim.device_dist = DeviceDistribution::uniform();
    } else if (dist == "beta_binomial") {
        const double alpha = r.require_float("alpha");
        const double beta = r.require_float("beta");
        if (!(alpha > 0.0) || !(beta > 0.0)) {
            throw ConfigError("beta_binomial needs alpha > 0 and beta > 0");
        }
        sim.device_dist = DeviceDistribution::beta_binomial(alpha, beta);
    } else {
        throw ConfigError("unknown distribution '" + dist +
                          "' (expected homo, uniform, or beta_binomial)");
    }

    sim.availability_rate = r.get_float("availability_rate", 0.3);
    if (!(sim.availability_rate > 0.0) || sim.availability_rate > 1.0) {
        throw ConfigError("availability_rate must be in (0, 1]");
    }

    const auto derived_n = static_cast<size_t>(std::max<int64_t>(
        1, std::llround(sim.availability_rate * static_cast<double>(sim.total_clients))));
    sim.server.n_participants =
        static_cast<size_t>(r.get_int("n_participants", static_cast<int64_t>(derived_n)));
    sim.server.response_goal = static_cast<size_t>(
        r.get_int("response_goal", static_cast<int64_t>(sim.server.n_participants)));
    sim.server.over_selection_q = r.get_float("over_selection_q", 1.5);
    sim.server.timeout_t0_s = r.get_float("timeout_t0_s", 60.0);
    out.timeout_explicit = r.has("timeout_t0_s");
    sim.server.timeout_delta_s = r.get_float("timeout_delta_s", 5.0);
    sim.server.timeout_k = static_cast<size_t>(r.get_int("timeout_k", 3));
    sim.server.timeout_floor_s = r.get_float("timeout_floor_s", 1.0);
    sim.server.mode = server_mode_from_string(r.get_string("mode", "sync"));
    const auto derived_k = static_cast<size_t>(std::max<int64_t>(
        1, std::llround(0.1 * static_cast<double>(sim.server.n_participants))));
    sim.server.async_goal_K =
        static_cast<size_t>(r.get_int("async_goal_K", static_cast<int64_t>(derived_k)));
    sim.server.staleness_max = static_cast<uint64_t>(r.get_int("staleness_max", 100));
    sim.server.max_rounds = static_cast<uint64_t>(r.get_int("max_rounds", 200));
    sim.server.server_lr = r.get_float("server_lr", 1.0);

    sim.algorithm = algorithm_mode_from_string(r.get_string("algorithm", "fedavg"));
    sim.codec = codec_from_string(r.get_string("codec", "none"));

    sim.train.learning_rate = r.get_float("learning_rate", 0.1);
    sim.train.batch_size = static_cast<size_t>(r.get_int("batch_size", 16));
    sim.train.local_epochs = static_cast<size_t>(r.get_int("local_epochs", 1));
    sim.finetune_epochs = static_cast<size_t>(r.get_int("finetune_epochs", 5));
    sim.hidden_width = static_cast<size_t>(r.get_int("hidden_width", 32));

    sim.data.n_clients = sim.total_clients;
    sim.data.n_classes = static_cast<size_t>(r.get_int("n_classes", 4));
    sim.data.dim = static_cast<size_t>(r.get_int("dim", 10));
    sim.data.samples_per_client = static_cast<size_t>(r.get_int("samples_per_client", 50));
    sim.data.dirichlet_alpha = r.get_float("data_alpha", 0.5);

    sim.cost.base_per_sample_s = r.get_float("base_per_sample_s", 0.02);
    sim.cost.delay_scale = r.get_float("delay_scale", 1.0);
    sim.drop_prob = r.get_float("drop_prob", 0.0);
    sim.patience = static_cast<size_t>(r.get_int("patience", 20));
    sim.min_delta = r.get_float("min_delta", 0.001);

    const auto seed_list = r.get_array("seeds", {1});
    if (seed_list.empty()) throw ConfigError("seeds must not be empty");
    out.seeds.clear();
    for (int64_t s : seed_list) out.seeds.push_back(static_cast<uint64_t>(s));
    sim.seed = out.seeds.front();

    out.label = r.get_string("label", label_from_path(source));
    out.latency_inject_s = r.get_float("latency_inject_s", 0.0);

    sim.validate();
    return out;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_config_text(buf.str(), path);
}

}  // namespace fsreal
