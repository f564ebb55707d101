#include "fsreal/train.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "fsreal/errors.hpp"
#include "fsreal/rng.hpp"

namespace fsreal {

Layout ModelArch::layout() const {
    return Layout::from_lengths({{"body", body_len()}, {"head", head_len()}});
}

ModelParams init_model(const ModelArch& arch, uint64_t seed) {
    Rng rng = derive_rng(seed, "init");
    Layout layout = arch.layout();
    std::vector<double> values(layout.total_length(), 0.0);
    // Gaussian weights scaled by 1/sqrt(fan_in), zero biases.
    const double body_scale = 1.0 / std::sqrt(static_cast<double>(arch.dim));
    const double head_scale = 1.0 / std::sqrt(static_cast<double>(arch.hidden));
    size_t pos = 0;
    for (size_t i = 0; i < arch.hidden * arch.dim; ++i) values[pos++] = body_scale * rng.next_normal();
    pos += arch.hidden;  // b1 = 0
    for (size_t i = 0; i < arch.n_classes * arch.hidden; ++i) values[pos++] = head_scale * rng.next_normal();
    return ModelParams(std::move(values), std::move(layout));
}

namespace {

struct Forward {
    std::vector<double> hidden;  // tanh activations
    std::vector<double> probs;   // softmax output
};

void forward_pass(const double* body, const double* head, const ModelArch& arch,
                  const double* x, Forward& fwd) {
    const double* w1 = body;
    const double* b1 = body + arch.hidden * arch.dim;
    const double* w2 = head;
    const double* b2 = head + arch.n_classes * arch.hidden;

    fwd.hidden.resize(arch.hidden);
    for (size_t h = 0; h < arch.hidden; ++h) {
        double z = b1[h];
        const double* row = w1 + h * arch.dim;
        for (size_t d = 0; d < arch.dim; ++d) z += row[d] * x[d];
        fwd.hidden[h] = std::tanh(z);
    }

    fwd.probs.resize(arch.n_classes);
    double zmax = -INFINITY;
    for (size_t c = 0; c < arch.n_classes; ++c) {
        double z = b2[c];
        const double* row = w2 + c * arch.hidden;
        for (size_t h = 0; h < arch.hidden; ++h) z += row[h] * fwd.hidden[h];
        fwd.probs[c] = z;
        zmax = std::max(zmax, z);
    }
    double denom = 0.0;
    for (size_t c = 0; c < arch.n_classes; ++c) {
        fwd.probs[c] = std::exp(fwd.probs[c] - zmax);
        denom += fwd.probs[c];
    }
    for (size_t c = 0; c < arch.n_classes; ++c) fwd.probs[c] /= denom;
}

void check_shapes(const ModelParams& model, const ClientShard& shard, const ModelArch& arch) {
    if (model.layout != arch.layout()) {
        throw ShapeError("model layout does not match architecture");
    }
    if (shard.dim != arch.dim) {
        throw ShapeError("shard dim " + std::to_string(shard.dim) +
                         " does not match architecture dim " + std::to_string(arch.dim));
    }
    if (shard.n_classes > arch.n_classes) {
        throw ShapeError("shard has more classes than the architecture head");
    }
}

std::pair<size_t, size_t> split_range(const ClientShard& shard, Split split) {
    switch (split) {
        case Split::kTrain: return {0, shard.train_count};
        case Split::kVal: return {shard.train_count, shard.train_count + shard.val_count};
        case Split::kTest:
            return {shard.train_count + shard.val_count, shard.n_samples};
    }
    return {0, 0};
}

}  // namespace

ModelParams local_train(const ModelParams& model, const ClientShard& shard,
                        const TrainConfig& cfg, const std::set<std::string>& frozen_layers,
                        const ModelArch& arch) {
    check_shapes(model, shard, arch);
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    for (const auto& name : frozen_layers) {
        if (!model.layout.has_layer(name)) {
            throw ShapeError("frozen layer '" + name + "' not in layout");
        }
    }

    ModelParams out = model;
    const bool freeze_body = frozen_layers.count("body") > 0;
    const bool freeze_head = frozen_layers.count("head") > 0;

    const size_t train_n = shard.train_count;
    if (train_n == 0 || cfg.local_epochs == 0) return out;

    std::vector<size_t> order(train_n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = derive_rng(cfg.seed, "train-order");

    double* body = out.layer_data("body");
    double* head = out.layer_data("head");
    std::vector<double> gbody(arch.body_len());
    std::vector<double> ghead(arch.head_len());
    Forward fwd;

    for (size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
        rng.shuffle(order);
        for (size_t start = 0; start < train_n; start += cfg.batch_size) {
            const size_t end = std::min(start + cfg.batch_size, train_n);
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            std::fill(gbody.begin(), gbody.end(), 0.0);
            std::fill(ghead.begin(), ghead.end(), 0.0);

            for (size_t bi = start; bi < end; ++bi) {
                const size_t s = order[bi];
                const double* x = shard.row(s);
                const int y = shard.labels[s];
                forward_pass(body, head, arch, x, fwd);

                // dz2 = p - onehot(y)
                double* gw2 = ghead.data();
                double* gb2 = ghead.data() + arch.n_classes * arch.hidden;
                std::vector<double> dz1(arch.hidden, 0.0);
                const double* w2 = head;
                for (size_t c = 0; c < arch.n_classes; ++c) {
                    const double dz2 = fwd.probs[c] - (static_cast<int>(c) == y ? 1.0 : 0.0);
                    gb2[c] += dz2;
                    double* gw2_row = gw2 + c * arch.hidden;
                    const double* w2_row = w2 + c * arch.hidden;
                    for (size_t h = 0; h < arch.hidden; ++h) {
                        gw2_row[h] += dz2 * fwd.hidden[h];
                        dz1[h] += dz2 * w2_row[h];
                    }
                }
                double* gw1 = gbody.data();
                double* gb1 = gbody.data() + arch.hidden * arch.dim;
                for (size_t h = 0; h < arch.hidden; ++h) {
                    const double a = fwd.hidden[h];
                    const double d = dz1[h] * (1.0 - a * a);
                    gb1[h] += d;
                    double* gw1_row = gw1 + h * arch.dim;
                    for (size_t dd = 0; dd < arch.dim; ++dd) gw1_row[dd] += d * x[dd];
                }
            }

            const double step = cfg.learning_rate * inv_batch;
            if (!freeze_body) {
                for (size_t i = 0; i < gbody.size(); ++i) body[i] -= step * gbody[i];
            }
            if (!freeze_head) {
                for (size_t i = 0; i < ghead.size(); ++i) head[i] -= step * ghead[i];
            }
        }
    }
    out.check_finite("local_train");
    return out;
}

ModelParams personalize_finetune(const ModelParams& model, const ClientShard& shard,
                                 const TrainConfig& cfg, const ModelArch& arch) {
    return local_train(model, shard, cfg, {}, arch);
}

double evaluate_accuracy(const ModelParams& model, const ClientShard& shard, Split split,
                         const ModelArch& arch) {
    check_shapes(model, shard, arch);
    const auto [lo, hi] = split_range(shard, split);
    if (hi <= lo) return 0.0;
    const double* body = model.layer_data("body");
    const double* head = model.layer_data("head");
    Forward fwd;
    size_t correct = 0;
    for (size_t s = lo; s < hi; ++s) {
        forward_pass(body, head, arch, shard.row(s), fwd);
        size_t argmax = 0;
        for (size_t c = 1; c < arch.n_classes; ++c) {
            if (fwd.probs[c] > fwd.probs[argmax]) argmax = c;
        }
        if (static_cast<int>(argmax) == shard.labels[s]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(hi - lo);
}

double evaluate_loss(const ModelParams& model, const ClientShard& shard, Split split,
                     const ModelArch& arch) {
    check_shapes(model, shard, arch);
    const auto [lo, hi] = split_range(shard, split);
    if (hi <= lo) return 0.0;
    const double* body = model.layer_data("body");
    const double* head = model.layer_data("head");
    Forward fwd;
    double total = 0.0;
    for (size_t s = lo; s < hi; ++s) {
        forward_pass(body, head, arch, shard.row(s), fwd);
        total += -std::log(std::max(fwd.probs[shard.labels[s]], 1e-300));
    }
    return total / static_cast<double>(hi - lo);
}

AlgorithmMode algorithm_mode_from_string(const std::string& s) {
    if (s == "fedavg") return AlgorithmMode::kFedAvg;
    if (s == "ft") return AlgorithmMode::kFt;
    if (s == "fedbabu") return AlgorithmMode::kFedBabu;
    throw ConfigError("unknown algorithm mode '" + s + "' (expected fedavg, ft, or fedbabu)");
}

std::string to_string(AlgorithmMode mode) {
    switch (mode) {
        case AlgorithmMode::kFedAvg: return "fedavg";
        case AlgorithmMode::kFt: return "ft";
        case AlgorithmMode::kFedBabu: return "fedbabu";
    }
    return "?";
}

std::set<std::string> make_upload_mask(AlgorithmMode mode) {
    switch (mode) {
        case AlgorithmMode::kFedAvg:
        case AlgorithmMode::kFt:
            return {"body", "head"};
        case AlgorithmMode::kFedBabu:
            return {"body"};
    }
    throw ConfigError("unknown algorithm mode");
}

std::set<std::string> frozen_layers_for(AlgorithmMode mode) {
    if (mode == AlgorithmMode::kFedBabu) return {"head"};
    return {};
}

}  // namespace fsreal
