#pragma once

#include <cstdint>
#include <set>
#include <string>

#include "fsreal/model.hpp"

namespace fsreal {

// Two-layer classifier: tanh hidden layer ("body" = W1 row-major H x dim
// plus b1) and linear softmax head ("head" = W2 row-major C x H plus b2).
struct ModelArch {
    size_t dim = 10;
    size_t hidden = 32;
    size_t n_classes = 4;

    size_t body_len() const { return hidden * dim + hidden; }
    size_t head_len() const { return n_classes * hidden + n_classes; }
    Layout layout() const;
};

ModelParams init_model(const ModelArch& arch, uint64_t seed);

// Which split of a shard an operation runs on.
enum class Split { kTrain, kVal, kTest };

// Mini-batch SGD on softmax cross-entropy over the shard's train split.
// Parameters of layers in frozen_layers are returned unchanged.
// Deterministic given cfg.seed.
ModelParams local_train(const ModelParams& model, const ClientShard& shard,
                        const TrainConfig& cfg, const std::set<std::string>& frozen_layers,
                        const ModelArch& arch);

// Evaluation-time fine-tuning: local_train with no frozen layers.
ModelParams personalize_finetune(const ModelParams& model, const ClientShard& shard,
                                 const TrainConfig& cfg, const ModelArch& arch);

double evaluate_accuracy(const ModelParams& model, const ClientShard& shard, Split split,
                         const ModelArch& arch);

// Mean cross-entropy loss over a split; used by gradient-check tests.
double evaluate_loss(const ModelParams& model, const ClientShard& shard, Split split,
                     const ModelArch& arch);

enum class AlgorithmMode { kFedAvg, kFt, kFedBabu };

AlgorithmMode algorithm_mode_from_string(const std::string& s);
std::string to_string(AlgorithmMode mode);

// Layers a client transmits: fedavg/ft upload everything, fedbabu uploads
// the body only and keeps the classification head frozen.
std::set<std::string> make_upload_mask(AlgorithmMode mode);

// Layers held fixed during federated local training.
std::set<std::string> frozen_layers_for(AlgorithmMode mode);

}  // namespace fsreal
