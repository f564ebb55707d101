#include "fsreal/serialize.hpp"

#include <cstring>

#include "fsreal/errors.hpp"

namespace fsreal {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f32(std::vector<uint8_t>& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

uint32_t get_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint64_t get_u64(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

float get_f32(const uint8_t* p) {
    const uint32_t bits = get_u32(p);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

static std::vector<const LayerSpec*> selected_layers(const Layout& layout,
                                                     const std::set<std::string>* mask) {
    std::vector<const LayerSpec*> out;
    for (const auto& l : layout.layers()) {
        if (mask == nullptr || mask->count(l.name)) out.push_back(&l);
    }
    return out;
}

size_t serialized_size(const Layout& layout, const std::set<std::string>* mask) {
    size_t size = 1;  // layer count
    for (const LayerSpec* l : selected_layers(layout, mask)) {
        size += 1 + l->name.size() + 4 + 4 * l->length;
    }
    return size;
}

std::vector<uint8_t> serialize_params(const ModelParams& params,
                                      const std::set<std::string>* mask) {
    const auto layers = selected_layers(params.layout, mask);
    if (layers.size() > 255) throw ShapeError("more than 255 layers");

    std::vector<uint8_t> out;
    out.reserve(serialized_size(params.layout, mask));
    out.push_back(static_cast<uint8_t>(layers.size()));
    for (const LayerSpec* l : layers) {
        if (l->name.size() > 255) throw ShapeError("layer name longer than 255 bytes");
        out.push_back(static_cast<uint8_t>(l->name.size()));
        out.insert(out.end(), l->name.begin(), l->name.end());
        put_u32(out, static_cast<uint32_t>(l->length));
    }
    for (const LayerSpec* l : layers) {
        const double* src = params.values.data() + l->offset;
        for (size_t i = 0; i < l->length; ++i) {
            put_f32(out, static_cast<float>(src[i]));
        }
    }
    return out;
}

ModelParams deserialize_params(const uint8_t* data, size_t len) {
    size_t pos = 0;
    auto need = [&](size_t n, const char* what) {
        if (pos + n > len) {
            throw CodecError("truncated model payload at byte " + std::to_string(pos) +
                             " while reading " + what);
        }
    };

    need(1, "layer count");
    const size_t n_layers = data[pos++];

    std::vector<std::pair<std::string, size_t>> lengths;
    lengths.reserve(n_layers);
    for (size_t i = 0; i < n_layers; ++i) {
        need(1, "layer name length");
        const size_t name_len = data[pos++];
        need(name_len, "layer name");
        std::string name(reinterpret_cast<const char*>(data + pos), name_len);
        pos += name_len;
        need(4, "layer length");
        lengths.emplace_back(std::move(name), get_u32(data + pos));
        pos += 4;
    }

    Layout layout = Layout::from_lengths(lengths);
    std::vector<double> values;
    values.reserve(layout.total_length());
    for (const auto& l : layout.layers()) {
        need(4 * l.length, ("layer '" + l.name + "' data").c_str());
        for (size_t i = 0; i < l.length; ++i) {
            values.push_back(static_cast<double>(get_f32(data + pos)));
            pos += 4;
        }
    }
    if (pos != len) {
        throw CodecError("trailing bytes in model payload: consumed " + std::to_string(pos) +
                         " of " + std::to_string(len));
    }
    return ModelParams(std::move(values), std::move(layout));
}

}  // namespace fsreal
