#include "fsreal/device.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "fsreal/errors.hpp"

namespace fsreal {

const NetworkProfile& network_profile(int level) {
    static const std::array<NetworkProfile, 3> kProfiles = {{
        {80.0, 400.0, 58000.0, 173000.0},
        {35.0, 200.0, 75000.0, 285000.0},
        {0.0, 0.0, 340000.0, 1024000.0},
    }};
    if (level < 0 || level > 2) throw ConfigError("network profile level out of range");
    return kProfiles[static_cast<size_t>(level)];
}

namespace {

constexpr std::array<int, 4> kCores = {1, 2, 3, 4};
constexpr std::array<double, 3> kFreqs = {2.55, 2.9, 3.3};
constexpr std::array<int, 2> kMemory = {256, 1024};

struct Combo {
    int cores_i, freq_i, mem_i, net_i;
    double score;
};

const std::vector<Combo>& sorted_combos() {
    static const std::vector<Combo> combos = [] {
        std::vector<Combo> all;
        all.reserve(kNumCapabilities);
        for (int c = 0; c < 4; ++c) {
            for (int f = 0; f < 3; ++f) {
                for (int m = 0; m < 2; ++m) {
                    for (int n = 0; n < 3; ++n) {
                        const double score = (c / 3.0 + f / 2.0 + m / 1.0 + n / 2.0) / 4.0;
                        all.push_back({c, f, m, n, score});
                    }
                }
            }
        }
        std::sort(all.begin(), all.end(), [](const Combo& a, const Combo& b) {
            if (a.score != b.score) return a.score < b.score;
            if (a.cores_i != b.cores_i) return a.cores_i < b.cores_i;
            if (a.freq_i != b.freq_i) return a.freq_i < b.freq_i;
            if (a.mem_i != b.mem_i) return a.mem_i < b.mem_i;
            return a.net_i < b.net_i;
        });
        return all;
    }();
    return combos;
}

}  // namespace

DeviceCapability capability_from_index(int index) {
    if (index < 0 || index >= kNumCapabilities) {
        throw ConfigError("capacity index " + std::to_string(index) + " out of [0,71]");
    }
    const Combo& c = sorted_combos()[static_cast<size_t>(index)];
    DeviceCapability cap;
    cap.cores = kCores[c.cores_i];
    cap.freq_ghz = kFreqs[c.freq_i];
    cap.memory_mb = kMemory[c.mem_i];
    cap.net_level = c.net_i;
    cap.capacity_index = index;
    return cap;
}

double beta_binomial_pmf(int i, int n, double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("beta-binomial needs alpha, beta > 0");
    if (i < 0 || i > n) return 0.0;
    auto lbeta = [](double a, double b) {
        return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    };
    const double lchoose = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
    return std::exp(lchoose + lbeta(i + alpha, n - i + beta) - lbeta(alpha, beta));
}

DeviceDistribution DeviceDistribution::homo(int index) {
    DeviceDistribution d;
    d.kind = Kind::kHomo;
    d.homo_index = index;
    return d;
}

DeviceDistribution DeviceDistribution::uniform() {
    DeviceDistribution d;
    d.kind = Kind::kUniform;
    return d;
}

DeviceDistribution DeviceDistribution::beta_binomial(double alpha, double beta) {
    DeviceDistribution d;
    d.kind = Kind::kBetaBinomial;
    d.alpha = alpha;
    d.beta = beta;
    return d;
}

int sample_capacity_index(const DeviceDistribution& dist, Rng& rng) {
    switch (dist.kind) {
        case DeviceDistribution::Kind::kHomo:
            return dist.homo_index;
        case DeviceDistribution::Kind::kUniform:
            return static_cast<int>(rng.next_below(kNumCapabilities));
        case DeviceDistribution::Kind::kBetaBinomial: {
            const double u = rng.next_unit();
            double cdf = 0.0;
            for (int i = 0; i < kNumCapabilities; ++i) {
                cdf += beta_binomial_pmf(i, kNumCapabilities - 1, dist.alpha, dist.beta);
                if (u < cdf) return i;
            }
            return kNumCapabilities - 1;  // numeric slop at the tail
        }
    }
    throw ConfigError("invalid device distribution");
}

double response_time(const NetworkProfile& net, int cores, double freq_ghz,
                     uint64_t model_bytes, uint64_t n_samples, const CostParams& cost,
                     Rng& rng) {
    const double bits = 8.0 * static_cast<double>(model_bytes);
    const double upload_s = bits / (net.up_kbps * 1000.0);
    const double download_s = bits / (net.down_kbps * 1000.0);
    const double per_sample = cost.base_per_sample_s / (cores * freq_ghz);
    const double compute_s = static_cast<double>(n_samples) * per_sample;
    const double other_s = rng.next_uniform(net.delay_lo_s, net.delay_hi_s) * cost.delay_scale;
    return upload_s + download_s + compute_s + other_s;
}

double response_time(const DeviceCapability& cap, uint64_t model_bytes, uint64_t n_samples,
                     const CostParams& cost, Rng& rng) {
    return response_time(cap.net(), cap.cores, cap.freq_ghz, model_bytes, n_samples, cost, rng);
}

DevicePool::DevicePool(size_t n_devices, const DeviceDistribution& dist, uint64_t seed) {
    Rng rng = derive_rng(seed, "pool");
    devices_.reserve(n_devices);
    for (size_t i = 0; i < n_devices; ++i) {
        Slot slot;
        slot.cap = capability_from_index(sample_capacity_index(dist, rng));
        devices_.push_back(slot);
    }
}

const DeviceCapability& DevicePool::capability(uint64_t device_id) const {
    return devices_.at(device_id).cap;
}

bool DevicePool::is_busy(uint64_t device_id) const { return devices_.at(device_id).busy; }

size_t DevicePool::available_count() const {
    size_t n = 0;
    for (const auto& d : devices_) {
        if (!d.busy && !d.offline) ++n;
    }
    return n;
}

std::vector<uint64_t> DevicePool::allocate(size_t count, Rng& rng) {
    std::vector<uint64_t> available;
    for (uint64_t id = 0; id < devices_.size(); ++id) {
        if (!devices_[id].busy && !devices_[id].offline) available.push_back(id);
    }
    const size_t take = std::min(count, available.size());
    // Partial Fisher-Yates over the sorted id list.
    for (size_t i = 0; i < take; ++i) {
        const size_t j = i + static_cast<size_t>(rng.next_below(available.size() - i));
        std::swap(available[i], available[j]);
    }
    available.resize(take);
    for (uint64_t id : available) devices_[id].busy = true;
    return available;
}

void DevicePool::release(uint64_t device_id) { devices_.at(device_id).busy = false; }

void DevicePool::roll_dropout(double drop_prob, Rng& rng) {
    for (auto& d : devices_) {
        d.offline = !d.busy && drop_prob > 0.0 && rng.next_unit() < drop_prob;
    }
}

}  // namespace fsreal
