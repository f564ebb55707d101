#include "fsreal/data.hpp"

#include <cmath>

#include "fsreal/errors.hpp"
#include "fsreal/rng.hpp"

namespace fsreal {

std::vector<ClientShard> generate_synthetic_federation(const DataConfig& cfg, uint64_t seed) {
    if (cfg.n_clients < 1) throw ConfigError("n_clients must be >= 1");
    if (cfg.n_classes < 2) throw ConfigError("n_classes must be >= 2");
    if (cfg.dim < 1) throw ConfigError("dim must be >= 1");
    if (cfg.samples_per_client < 1) throw ConfigError("samples_per_client must be >= 1");
    if (!(cfg.dirichlet_alpha > 0.0)) throw ConfigError("dirichlet_alpha must be > 0");

    // Shared class centers: random direction scaled to norm 3.
    Rng center_rng = derive_rng(seed, "data-centers");
    std::vector<std::vector<double>> centers(cfg.n_classes, std::vector<double>(cfg.dim));
    for (auto& c : centers) {
        double norm2 = 0.0;
        for (double& v : c) {
            v = center_rng.next_normal();
            norm2 += v * v;
        }
        const double scale = 3.0 / std::sqrt(norm2);
        for (double& v : c) v *= scale;
    }

    const std::vector<double> alphas(cfg.n_classes, cfg.dirichlet_alpha);
    std::vector<ClientShard> shards;
    shards.reserve(cfg.n_clients);
    for (uint64_t client = 0; client < cfg.n_clients; ++client) {
        Rng rng = derive_rng(seed, "data-client", 0, client);
        const std::vector<double> props = rng.next_dirichlet(alphas);
        std::vector<double> cdf(props.size());
        double acc = 0.0;
        for (size_t k = 0; k < props.size(); ++k) {
            acc += props[k];
            cdf[k] = acc;
        }

        ClientShard shard;
        shard.client_id = client;
        shard.dim = cfg.dim;
        shard.n_classes = cfg.n_classes;
        shard.n_samples = cfg.samples_per_client;
        shard.features.resize(cfg.samples_per_client * cfg.dim);
        shard.labels.resize(cfg.samples_per_client);
        for (size_t s = 0; s < cfg.samples_per_client; ++s) {
            const double u = rng.next_unit();
            size_t label = cfg.n_classes - 1;
            for (size_t k = 0; k < cdf.size(); ++k) {
                if (u < cdf[k]) {
                    label = k;
                    break;
                }
            }
            shard.labels[s] = static_cast<int>(label);
            double* row = shard.features.data() + s * cfg.dim;
            for (size_t d = 0; d < cfg.dim; ++d) {
                row[d] = centers[label][d] + rng.next_normal();
            }
        }

        // 6:2:2 train/val/test split in sample order.
        shard.train_count = (cfg.samples_per_client * 6) / 10;
        shard.val_count = (cfg.samples_per_client * 2) / 10;
        if (shard.train_count == 0) shard.train_count = 1;
        if (shard.train_count + shard.val_count > shard.n_samples) {
            shard.val_count = shard.n_samples - shard.train_count;
        }
        shards.push_back(std::move(shard));
    }
    return shards;
}

}  // namespace fsreal
