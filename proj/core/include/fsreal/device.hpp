#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsreal/rng.hpp"

namespace fsreal {

inline constexpr int kNumCapabilities = 72;  // 4 cores x 3 freqs x 2 mem x 3 nets

struct NetworkProfile {
    double delay_lo_s = 0.0;
    double delay_hi_s = 0.0;
    double up_kbps = 0.0;
    double down_kbps = 0.0;
};

// The three profiles, worst to best; delay ranges pair 1:1 with the
// bandwidth pairs (worst delay with lowest bandwidth).
const NetworkProfile& network_profile(int level);

struct DeviceCapability {
    int cores = 1;            // 1..4
    double freq_ghz = 2.55;   // 2.55, 2.9, 3.3
    int memory_mb = 256;      // 256, 1024
    int net_level = 0;        // index into network_profile
    int capacity_index = 0;   // 0..71, diagonal-sorted rank

    const NetworkProfile& net() const { return network_profile(net_level); }
};

// Diagonal capacity order: capacity score = mean of the four per-factor
// normalized ranks; ties broken lexicographically by
// (cores, freq, memory, network). Bijective over the 72 combinations;
// index 0 is the weakest corner, 71 the strongest.
DeviceCapability capability_from_index(int index);

// Beta-binomial pmf over {0..n}, computed in log-space via lgamma.
double beta_binomial_pmf(int i, int n, double alpha, double beta);

struct DeviceDistribution {
    enum class Kind { kHomo, kUniform, kBetaBinomial };
    Kind kind = Kind::kUniform;
    int homo_index = 36;
    double alpha = 10.0;
    double beta = 10.0;

    static DeviceDistribution homo(int index);
    static DeviceDistribution uniform();
    static DeviceDistribution beta_binomial(double alpha, double beta);
};

// homo -> the fixed index; uniform -> uniform over 0..71; beta_binomial ->
// inverse-CDF sampling from beta_binomial_pmf.
int sample_capacity_index(const DeviceDistribution& dist, Rng& rng);

struct CostParams {
    double base_per_sample_s = 0.02;  // per-sample compute cost at 1 core x 1 GHz
    double delay_scale = 1.0;         // scales the drawn network delay
};

// Response-time approximation:
//   8*model_bytes/(up_kbps*1000) + 8*model_bytes/(down_kbps*1000)
//   + n_samples * base_per_sample_s/(cores*freq_ghz)
//   + Uniform(delay range) * delay_scale
// Always consumes exactly one draw from rng.
double response_time(const DeviceCapability& cap, uint64_t model_bytes, uint64_t n_samples,
                     const CostParams& cost, Rng& rng);

double response_time(const NetworkProfile& net, int cores, double freq_ghz,
                     uint64_t model_bytes, uint64_t n_samples, const CostParams& cost,
                     Rng& rng);

// Pool of simulated devices allocated to clients per round. Single-owner:
// all mutation goes through one event loop or one server-side lock.
class DevicePool {
public:
    DevicePool() = default;
    DevicePool(size_t n_devices, const DeviceDistribution& dist, uint64_t seed);

    size_t size() const { return devices_.size(); }
    const DeviceCapability& capability(uint64_t device_id) const;
    bool is_busy(uint64_t device_id) const;
    size_t available_count() const;

    // Uniform random subset of idle devices, size min(count, available);
    // the returned devices are marked busy until release().
    std::vector<uint64_t> allocate(size_t count, Rng& rng);
    void release(uint64_t device_id);

    // Per-round transient unavailability: marks each idle device offline
    // with probability drop_prob until the next roll.
    void roll_dropout(double drop_prob, Rng& rng);

private:
    struct Slot {
        DeviceCapability cap;
        bool busy = false;
        bool offline = false;
    };
    std::vector<Slot> devices_;
};

}  // namespace fsreal
