#include "fsreal/event_log.hpp"

#include <fstream>
#include <ostream>

#include "fsreal/errors.hpp"

namespace fsreal {

nlohmann::json LogEvent::to_json() const {
    nlohmann::json j;
    j["ts"] = ts;
    j["seq"] = seq;
    j["type"] = type;
    j["round"] = round;
    if (type == "broadcast" || type == "rebroadcast" || type == "response") {
        j["client_id"] = client_id;
        j["bytes"] = bytes;
    }
    if (type == "response") {
        j["n_samples"] = n_samples;
        j["status"] = status;
        j["payload_b64"] = payload_b64;
    }
    if (type == "timeout") {
        j["generation"] = generation;
        j["n_ava"] = n_ava;
        j["t_o_after"] = t_o_after;
    }
    if (type == "aggregate") {
        j["n_updates"] = n_updates;
        j["model_digest"] = model_digest;
    }
    if (type == "eval") {
        j["val_acc"] = val_acc;
    }
    return j;
}

LogEvent LogEvent::from_json(const nlohmann::json& j) {
    LogEvent e;
    e.ts = j.at("ts").get<double>();
    e.seq = j.at("seq").get<uint64_t>();
    e.type = j.at("type").get<std::string>();
    e.round = j.at("round").get<uint64_t>();
    e.client_id = j.value("client_id", uint64_t{0});
    e.bytes = j.value("bytes", uint64_t{0});
    e.n_samples = j.value("n_samples", uint64_t{0});
    e.status = j.value("status", std::string{});
    e.payload_b64 = j.value("payload_b64", std::string{});
    e.generation = j.value("generation", uint64_t{0});
    e.n_ava = j.value("n_ava", uint64_t{0});
    e.t_o_after = j.value("t_o_after", 0.0);
    e.n_updates = j.value("n_updates", uint64_t{0});
    e.model_digest = j.value("model_digest", std::string{});
    e.val_acc = j.value("val_acc", 0.0);
    return e;
}

void EventLogWriter::write_header(const nlohmann::json& config, uint64_t seed) {
    nlohmann::json j;
    j["type"] = "run_header";
    j["log_version"] = 1;
    j["seed"] = seed;
    j["config"] = config;
    (*out_) << j.dump() << "\n";
}

void EventLogWriter::write(const LogEvent& event) { (*out_) << event.to_json().dump() << "\n"; }

void EventLogWriter::write_footer(const RunFooter& footer) {
    nlohmann::json j;
    j["type"] = "run_footer";
    j["final_model_digest"] = footer.final_model_digest;
    j["completed_rounds"] = footer.completed_rounds;
    j["virtual_time_s"] = footer.virtual_time_s;
    j["inflight_at_end"] = footer.inflight_at_end;
    (*out_) << j.dump() << "\n";
    out_->flush();
}

ParsedLog read_event_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open event log '" + path + "'");

    ParsedLog log;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw IoError("event log parse error at line " + std::to_string(line_no) + ": " +
                          e.what());
        }
        const std::string type = j.value("type", std::string{});
        if (type == "run_header") {
            log.header = j;
        } else if (type == "run_footer") {
            log.footer.final_model_digest = j.value("final_model_digest", std::string{});
            log.footer.completed_rounds = j.value("completed_rounds", uint64_t{0});
            log.footer.virtual_time_s = j.value("virtual_time_s", 0.0);
            log.footer.inflight_at_end = j.value("inflight_at_end", uint64_t{0});
            log.has_footer = true;
        } else {
            try {
                log.events.push_back(LogEvent::from_json(j));
            } catch (const nlohmann::json::exception& e) {
                throw IoError("bad event at line " + std::to_string(line_no) + ": " + e.what());
            }
        }
    }
    if (log.header.is_null()) throw IoError("event log has no run_header: " + path);
    return log;
}

}  // namespace fsreal
