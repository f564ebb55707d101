#include "fsreal/aggregate.hpp"

#include <algorithm>
#include <cmath>

#include "fsreal/errors.hpp"

namespace fsreal {

namespace {

// Neumaier-compensated accumulator.
struct Compensated {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + comp; }
};

std::vector<const UpdateRecord*> sorted_refs(const std::vector<UpdateRecord>& updates) {
    std::vector<const UpdateRecord*> refs;
    refs.reserve(updates.size());
    for (const auto& u : updates) refs.push_back(&u);
    std::sort(refs.begin(), refs.end(), [](const UpdateRecord* a, const UpdateRecord* b) {
        if (a->client_id != b->client_id) return a->client_id < b->client_id;
        return a->origin_round < b->origin_round;
    });
    return refs;
}

}  // namespace

namespace {

// Every layer an update carries must exist in the global layout with the
// same length; masked uploads may carry a subset, never a different shape.
void check_update_layout(const UpdateRecord& u, const Layout& global, const char* op) {
    for (const auto& l : u.params.layout.layers()) {
        if (!global.has_layer(l.name) || global.layer(l.name).length != l.length) {
            throw ShapeError(std::string(op) + ": mixed layouts (layer '" + l.name +
                             "' from client " + std::to_string(u.client_id) +
                             " does not match the global layout)");
        }
    }
    for (const auto& name : u.upload_mask) {
        if (!u.params.layout.has_layer(name)) {
            throw ShapeError(std::string(op) + ": upload mask names layer '" + name +
                             "' absent from the update payload");
        }
    }
}

}  // namespace

ModelParams fedavg_aggregate(const std::vector<UpdateRecord>& updates,
                             const ModelParams& prev_global) {
    if (updates.empty()) throw ProtocolError("fedavg_aggregate: empty update list");
    for (const auto& u : updates) {
        if (u.n_samples < 1) throw ProtocolError("fedavg_aggregate: n_samples must be >= 1");
        check_update_layout(u, prev_global.layout, "fedavg_aggregate");
    }

    const auto refs = sorted_refs(updates);
    const Layout& layout = prev_global.layout;

    ModelParams out = prev_global;
    for (const auto& layer : layout.layers()) {
        // Weight denominator restricted to updates that carry this layer.
        uint64_t total_samples = 0;
        for (const UpdateRecord* u : refs) {
            if (u->upload_mask.count(layer.name)) total_samples += u->n_samples;
        }
        if (total_samples == 0) continue;  // no mask covers it: keep previous global

        std::vector<Compensated> acc(layer.length);
        for (const UpdateRecord* u : refs) {
            if (!u->upload_mask.count(layer.name)) continue;
            const double w = static_cast<double>(u->n_samples) /
                             static_cast<double>(total_samples);
            const double* src = u->params.layer_data(layer.name);
            for (size_t i = 0; i < layer.length; ++i) acc[i].add(w * src[i]);
        }
        double* dst = out.values.data() + layer.offset;
        for (size_t i = 0; i < layer.length; ++i) dst[i] = acc[i].value();
    }
    out.check_finite("fedavg_aggregate");
    return out;
}

double staleness_weight(uint64_t staleness) {
    return 1.0 / std::sqrt(1.0 + static_cast<double>(staleness));
}

ModelParams fedbuff_aggregate(const ModelParams& global,
                              const std::vector<UpdateRecord>& buffer, double server_lr,
                              uint64_t current_round) {
    if (buffer.empty()) throw ProtocolError("fedbuff_aggregate: empty buffer");
    for (const auto& u : buffer) {
        if (u.origin_round > current_round) {
            throw ProtocolError("fedbuff_aggregate: negative staleness (origin_round " +
                                std::to_string(u.origin_round) + " > current " +
                                std::to_string(current_round) + ")");
        }
    }

    for (const auto& u : buffer) check_update_layout(u, global.layout, "fedbuff_aggregate");

    const auto refs = sorted_refs(buffer);
    const double inv_k = 1.0 / static_cast<double>(buffer.size());
    const Layout& layout = global.layout;

    ModelParams out = global;
    for (const auto& layer : layout.layers()) {
        std::vector<Compensated> acc(layer.length);
        bool touched = false;
        for (const UpdateRecord* u : refs) {
            if (!u->upload_mask.count(layer.name)) continue;
            touched = true;
            const double s = staleness_weight(current_round - u->origin_round);
            const double* src = u->params.layer_data(layer.name);
            for (size_t i = 0; i < layer.length; ++i) acc[i].add(s * src[i]);
        }
        if (!touched) continue;
        double* dst = out.values.data() + layer.offset;
        for (size_t i = 0; i < layer.length; ++i) {
            dst[i] += server_lr * inv_k * acc[i].value();
        }
    }
    out.check_finite("fedbuff_aggregate");
    return out;
}

}  // namespace fsreal
