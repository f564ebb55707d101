#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace fsreal {

// Deterministic RNG with counter-based child streams.
//
// All randomness in a run derives from one root seed. Independent streams
// are keyed by (purpose, round, client) so that the draw sequence of one
// consumer can never shift another's. mt19937_64 output is standardized;
// the distribution transforms below are hand-rolled so results are
// identical across standard library implementations.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_str(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Unbiased integer in [0, bound) by rejection.
    uint64_t next_below(uint64_t bound) {
        if (bound == 0) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % bound;
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Standard normal via Box-Muller; caches the second deviate.
    double next_normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1, u2;
        do {
            u1 = next_unit();
        } while (u1 <= 0.0);
        u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    // Gamma(alpha, 1) by Marsaglia-Tsang, boosted for alpha < 1.
    double next_gamma(double alpha) {
        if (alpha < 1.0) {
            const double u = next_unit();
            return next_gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = next_normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_unit();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    std::vector<double> next_dirichlet(const std::vector<double>& alphas) {
        std::vector<double> out(alphas.size());
        double total = 0.0;
        for (size_t i = 0; i < alphas.size(); ++i) {
            out[i] = next_gamma(alphas[i]);
            total += out[i];
        }
        for (double& v : out) v /= total;
        return out;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Child-stream derivation: purpose is a short label ("train", "select",
// "latency", ...), round and client widen the key space.
inline uint64_t derive_seed(uint64_t root_seed, std::string_view purpose,
                            uint64_t round = 0, uint64_t client = 0) {
    uint64_t s = splitmix64(root_seed ^ hash_str(purpose));
    s = splitmix64(s ^ (round * 0x9e3779b97f4a7c15ULL + 1));
    s = splitmix64(s ^ (client * 0xd1342543de82ef95ULL + 1));
    return s;
}

inline Rng derive_rng(uint64_t root_seed, std::string_view purpose,
                      uint64_t round = 0, uint64_t client = 0) {
    return Rng(derive_seed(root_seed, purpose, round, client));
}

// Uniform random subset of `count` elements (all of them when count is
// larger), by partial Fisher-Yates over a copy.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> candidates, size_t count, Rng& rng) {
    const size_t take = std::min(count, candidates.size());
    for (size_t i = 0; i < take; ++i) {
        const size_t j = i + static_cast<size_t>(rng.next_below(candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(take);
    return candidates;
}

}  // namespace fsreal
