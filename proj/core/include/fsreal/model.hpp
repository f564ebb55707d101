#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace fsreal {

struct LayerSpec {
    std::string name;
    size_t offset = 0;
    size_t length = 0;
};

// Named, contiguous partition of a flat parameter vector.
class Layout {
public:
    Layout() = default;
    explicit Layout(std::vector<LayerSpec> layers);

    // Builds contiguous offsets from (name, length) pairs in order.
    static Layout from_lengths(const std::vector<std::pair<std::string, size_t>>& lengths);

    size_t total_length() const { return total_; }
    const std::vector<LayerSpec>& layers() const { return layers_; }
    const LayerSpec& layer(const std::string& name) const;
    bool has_layer(const std::string& name) const;
    std::set<std::string> layer_names() const;

    bool operator==(const Layout& other) const;
    bool operator!=(const Layout& other) const { return !(*this == other); }

private:
    std::vector<LayerSpec> layers_;
    size_t total_ = 0;
};

// Flat parameter vector plus its layer layout. Values live as doubles in
// memory; the wire form is little-endian FP32 (see serialize.hpp).
struct ModelParams {
    std::vector<double> values;
    Layout layout;

    ModelParams() = default;
    ModelParams(std::vector<double> v, Layout l);

    size_t size() const { return values.size(); }
    bool all_finite() const;
    void check_finite(const char* context) const;

    // Span helpers over a named layer.
    double* layer_data(const std::string& name);
    const double* layer_data(const std::string& name) const;

    bool operator==(const ModelParams& other) const;
};

// One client's local dataset: features row-major (n_samples x dim),
// integer labels, and fixed train/val/test split boundaries.
struct ClientShard {
    uint64_t client_id = 0;
    std::vector<double> features;
    std::vector<int> labels;
    size_t n_samples = 0;
    size_t dim = 0;
    size_t n_classes = 0;
    size_t train_count = 0;
    size_t val_count = 0;  // test = n_samples - train_count - val_count

    size_t test_count() const { return n_samples - train_count - val_count; }
    const double* row(size_t i) const { return features.data() + i * dim; }
};

struct TrainConfig {
    double learning_rate = 0.1;
    size_t local_epochs = 1;
    size_t batch_size = 16;
    uint64_t seed = 0;
};

// A client's reply in one round: full params for sync FedAvg, a delta
// against the broadcast model for async FedBuff.
struct UpdateRecord {
    uint64_t client_id = 0;
    ModelParams params;
    size_t n_samples = 0;
    uint64_t origin_round = 0;
    std::set<std::string> upload_mask;
};

}  // namespace fsreal
