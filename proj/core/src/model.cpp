#include "fsreal/model.hpp"

#include <cmath>
#include <stdexcept>

#include "fsreal/errors.hpp"

namespace fsreal {

Layout::Layout(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
    size_t expected = 0;
    for (const auto& l : layers_) {
        if (l.offset != expected) {
            throw ShapeError("layout offsets must be contiguous: layer '" + l.name +
                             "' at " + std::to_string(l.offset) + ", expected " +
                             std::to_string(expected));
        }
        expected += l.length;
    }
    total_ = expected;
}

Layout Layout::from_lengths(const std::vector<std::pair<std::string, size_t>>& lengths) {
    std::vector<LayerSpec> layers;
    size_t offset = 0;
    for (const auto& [name, len] : lengths) {
        layers.push_back({name, offset, len});
        offset += len;
    }
    return Layout(std::move(layers));
}

const LayerSpec& Layout::layer(const std::string& name) const {
    for (const auto& l : layers_) {
        if (l.name == name) return l;
    }
    throw ShapeError("unknown layer '" + name + "'");
}

bool Layout::has_layer(const std::string& name) const {
    for (const auto& l : layers_) {
        if (l.name == name) return true;
    }
    return false;
}

std::set<std::string> Layout::layer_names() const {
    std::set<std::string> names;
    for (const auto& l : layers_) names.insert(l.name);
    return names;
}

bool Layout::operator==(const Layout& other) const {
    if (layers_.size() != other.layers_.size()) return false;
    for (size_t i = 0; i < layers_.size(); ++i) {
        if (layers_[i].name != other.layers_[i].name ||
            layers_[i].offset != other.layers_[i].offset ||
            layers_[i].length != other.layers_[i].length) {
            return false;
        }
    }
    return true;
}

ModelParams::ModelParams(std::vector<double> v, Layout l)
    : values(std::move(v)), layout(std::move(l)) {
    if (values.size() != layout.total_length()) {
        throw ShapeError("parameter vector length " + std::to_string(values.size()) +
                         " does not match layout total " +
                         std::to_string(layout.total_length()));
    }
}

bool ModelParams::all_finite() const {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void ModelParams::check_finite(const char* context) const {
    if (!all_finite()) {
        throw CodecError(std::string(context) + ": non-finite parameter value");
    }
}

double* ModelParams::layer_data(const std::string& name) {
    return values.data() + layout.layer(name).offset;
}

const double* ModelParams::layer_data(const std::string& name) const {
    return values.data() + layout.layer(name).offset;
}

bool ModelParams::operator==(const ModelParams& other) const {
    return layout == other.layout && values == other.values;
}

}  // namespace fsreal
