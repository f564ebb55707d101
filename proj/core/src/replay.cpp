#include "fsreal/replay.hpp"

#include "fsreal/digest.hpp"
#include "fsreal/errors.hpp"
#include "fsreal/event_log.hpp"
#include "fsreal/serialize.hpp"
#include "fsreal/sim.hpp"

namespace fsreal {

ReplayResult replay_event_log(const std::string& path) {
    ReplayResult result;
    ParsedLog log;
    try {
        log = read_event_log(path);
    } catch (const std::exception& e) {
        result.message = e.what();
        return result;
    }
    if (!log.has_footer) {
        result.message = "event log has no run_footer (truncated run?)";
        return result;
    }

    try {
        const SimConfig cfg = sim_config_from_json(log.header.at("config"));
        const uint64_t seed = log.header.at("seed").get<uint64_t>();
        ServerProcessor proc(cfg.server, init_model(cfg.arch(), seed));

        for (const auto& ev : log.events) {
            if (ev.type == "broadcast") {
                proc.on_broadcast(ev.round, {ev.client_id});
            } else if (ev.type == "rebroadcast") {
                proc.on_rebroadcast({ev.client_id});
            } else if (ev.type == "response") {
                UpdateRecord update;
                update.client_id = ev.client_id;
                update.params = decode(base64_decode(ev.payload_b64));
                update.upload_mask = update.params.layout.layer_names();
                update.n_samples = ev.n_samples;
                update.origin_round = ev.round;
                const ResponseStatus status = proc.on_response(update);
                if (to_string(status) != ev.status) {
                    result.message = "response verdict mismatch at seq " +
                                     std::to_string(ev.seq) + ": log says '" + ev.status +
                                     "', replay says '" + to_string(status) + "'";
                    return result;
                }
            } else if (ev.type == "timeout") {
                const auto action = proc.on_timeout_fire(ev.round, ev.generation, ev.n_ava);
                if (!action) {
                    result.message = "timeout event at seq " + std::to_string(ev.seq) +
                                     " is not valid during replay";
                    return result;
                }
            } else if (ev.type == "aggregate") {
                if (ev.round + 1 != proc.current_round()) {
                    result.message = "aggregate event at seq " + std::to_string(ev.seq) +
                                     " for round " + std::to_string(ev.round) +
                                     " but replay is at round " +
                                     std::to_string(proc.current_round());
                    return result;
                }
                const std::string digest = sha256_hex(serialize_params(proc.global()));
                if (digest != ev.model_digest) {
                    result.message = "model digest mismatch after round " +
                                     std::to_string(ev.round) + " (seq " +
                                     std::to_string(ev.seq) + ")";
                    return result;
                }
            }
            // eval events carry derived data only; nothing to replay.
        }

        result.recomputed_final_digest = sha256_hex(serialize_params(proc.global()));
        result.completed_rounds = proc.completed_rounds();
        if (result.recomputed_final_digest != log.footer.final_model_digest) {
            result.message = "final model digest mismatch: log has " +
                             log.footer.final_model_digest + ", replay computed " +
                             result.recomputed_final_digest;
            return result;
        }
        if (result.completed_rounds != log.footer.completed_rounds) {
            result.message = "round count mismatch: log footer has " +
                             std::to_string(log.footer.completed_rounds) +
                             ", replay completed " +
                             std::to_string(result.completed_rounds);
            return result;
        }
        result.ok = true;
        return result;
    } catch (const std::exception& e) {
        result.message = e.what();
        return result;
    }
}

}  // namespace fsreal
