#pragma once

#include <cstdint>
#include <vector>

#include "fsreal/model.hpp"

namespace fsreal {

struct DataConfig {
    size_t n_clients = 100;
    size_t n_classes = 4;
    size_t dim = 10;
    size_t samples_per_client = 50;
    double dirichlet_alpha = 0.5;  // label-skew concentration across classes
};

// Synthetic non-IID federation: per-client class proportions drawn from
// Dirichlet(alpha); features from per-class Gaussian clusters with unit
// covariance and mean norm 3. Each shard is split 6:2:2 into
// train/val/test. Deterministic given seed.
std::vector<ClientShard> generate_synthetic_federation(const DataConfig& cfg, uint64_t seed);

}  // namespace fsreal
