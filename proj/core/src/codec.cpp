#include "fsreal/codec.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>

#include "fsreal/errors.hpp"
#include "fsreal/serialize.hpp"

namespace fsreal {

CodecKind codec_from_string(const std::string& s) {
    if (s == "none") return CodecKind::kNone;
    if (s == "gzip") return CodecKind::kGzip;
    if (s == "fp16") return CodecKind::kFp16;
    if (s == "int8") return CodecKind::kInt8;
    throw ConfigError("unknown codec '" + s + "' (expected none, gzip, fp16, or int8)");
}

std::string to_string(CodecKind kind) {
    switch (kind) {
        case CodecKind::kNone: return "none";
        case CodecKind::kGzip: return "gzip";
        case CodecKind::kFp16: return "fp16";
        case CodecKind::kInt8: return "int8";
    }
    return "?";
}

uint16_t f32_to_f16(float value) {
    uint32_t bits;
    std::memcpy(&bits, &value, 4);
    const uint16_t sign = static_cast<uint16_t>((bits >> 16) & 0x8000u);
    const int32_t exp = static_cast<int32_t>((bits >> 23) & 0xffu);
    uint32_t mant = bits & 0x7fffffu;

    if (exp == 0xff) {
        // Inf is flushed to the max finite half; NaN is rejected upstream.
        return sign | 0x7bffu;
    }

    int32_t e = exp - 127 + 15;
    if (e >= 31) return sign | 0x7bffu;  // overflow -> +-65504

    if (e <= 0) {
        // Subnormal half (or zero). Shift with round-to-nearest-even.
        if (e < -10) return sign;
        mant |= 0x800000u;
        const uint32_t shift = static_cast<uint32_t>(14 - e);
        uint16_t h = static_cast<uint16_t>(mant >> shift);
        const uint32_t rem = mant & ((1u << shift) - 1u);
        const uint32_t half = 1u << (shift - 1);
        if (rem > half || (rem == half && (h & 1u))) ++h;
        return sign | h;
    }

    uint16_t h = static_cast<uint16_t>((e << 10) | (mant >> 13));
    const uint32_t rem = mant & 0x1fffu;
    if (rem > 0x1000u || (rem == 0x1000u && (h & 1u))) ++h;
    if ((h & 0x7c00u) == 0x7c00u) h = (h & 0x8000u) | 0x7bffu;  // rounded into inf
    return sign | h;
}

float f16_to_f32(uint16_t bits) {
    const uint32_t sign = static_cast<uint32_t>(bits & 0x8000u) << 16;
    const uint32_t exp = (bits >> 10) & 0x1fu;
    const uint32_t mant = bits & 0x3ffu;
    uint32_t out;
    if (exp == 0) {
        if (mant == 0) {
            out = sign;
        } else {
            // Normalize the subnormal.
            int e = -1;
            uint32_t m = mant;
            do {
                ++e;
                m <<= 1;
            } while ((m & 0x400u) == 0);
            out = sign | ((127 - 15 - e) << 23) | ((m & 0x3ffu) << 13);
        }
    } else if (exp == 31) {
        out = sign | 0x7f800000u | (mant << 13);
    } else {
        out = sign | ((exp - 15 + 127) << 23) | (mant << 13);
    }
    float f;
    std::memcpy(&f, &out, 4);
    return f;
}

namespace {

std::vector<uint8_t> deflate_bytes(const std::vector<uint8_t>& raw) {
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> out(bound);
    const int rc = compress2(out.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                             Z_DEFAULT_COMPRESSION);
    if (rc != Z_OK) throw CodecError("deflate failed (zlib rc " + std::to_string(rc) + ")");
    out.resize(bound);
    return out;
}

std::vector<uint8_t> inflate_bytes(const uint8_t* data, size_t len) {
    z_stream zs;
    std::memset(&zs, 0, sizeof(zs));
    if (inflateInit(&zs) != Z_OK) throw CodecError("inflateInit failed");

    std::vector<uint8_t> out;
    out.resize(std::max<size_t>(4 * len, 1024));
    zs.next_in = const_cast<Bytef*>(data);
    zs.avail_in = static_cast<uInt>(len);
    size_t written = 0;
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        if (written == out.size()) out.resize(out.size() * 2);
        zs.next_out = out.data() + written;
        zs.avail_out = static_cast<uInt>(out.size() - written);
        rc = inflate(&zs, Z_NO_FLUSH);
        written = out.size() - zs.avail_out;
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw CodecError("corrupt deflate stream at input byte " +
                             std::to_string(len - zs.avail_in) + " (zlib rc " +
                             std::to_string(rc) + ")");
        }
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw CodecError("truncated deflate stream");
        }
    }
    inflateEnd(&zs);
    out.resize(written);
    return out;
}

std::vector<const LayerSpec*> masked_layers(const Layout& layout,
                                            const std::set<std::string>* mask) {
    std::vector<const LayerSpec*> out;
    for (const auto& l : layout.layers()) {
        if (mask == nullptr || mask->count(l.name)) out.push_back(&l);
    }
    return out;
}

void write_layout_table(std::vector<uint8_t>& out,
                        const std::vector<const LayerSpec*>& layers) {
    out.push_back(static_cast<uint8_t>(layers.size()));
    for (const LayerSpec* l : layers) {
        out.push_back(static_cast<uint8_t>(l->name.size()));
        out.insert(out.end(), l->name.begin(), l->name.end());
        put_u32(out, static_cast<uint32_t>(l->length));
    }
}

struct Reader {
    const uint8_t* data;
    size_t len;
    size_t pos = 0;

    void need(size_t n, const char* what) const {
        if (pos + n > len) {
            throw CodecError("truncated payload at byte " + std::to_string(pos) +
                             " while reading " + what);
        }
    }
    uint8_t u8(const char* what) {
        need(1, what);
        return data[pos++];
    }
    uint32_t u32(const char* what) {
        need(4, what);
        const uint32_t v = get_u32(data + pos);
        pos += 4;
        return v;
    }
    float f32(const char* what) {
        need(4, what);
        const float v = get_f32(data + pos);
        pos += 4;
        return v;
    }
    std::string str(size_t n, const char* what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(data + pos), n);
        pos += n;
        return s;
    }
};

Layout read_layout_table(Reader& r) {
    const size_t n_layers = r.u8("layer count");
    std::vector<std::pair<std::string, size_t>> lengths;
    lengths.reserve(n_layers);
    for (size_t i = 0; i < n_layers; ++i) {
        const size_t name_len = r.u8("layer name length");
        std::string name = r.str(name_len, "layer name");
        lengths.emplace_back(std::move(name), r.u32("layer length"));
    }
    return Layout::from_lengths(lengths);
}

}  // namespace

std::vector<uint8_t> encode(const ModelParams& params, CodecKind codec,
                            const std::set<std::string>* mask) {
    params.check_finite("encode");
    const auto layers = masked_layers(params.layout, mask);

    std::vector<uint8_t> out;
    out.push_back(static_cast<uint8_t>(codec));
    switch (codec) {
        case CodecKind::kNone: {
            const auto raw = serialize_params(params, mask);
            out.insert(out.end(), raw.begin(), raw.end());
            break;
        }
        case CodecKind::kGzip: {
            const auto raw = serialize_params(params, mask);
            const auto packed = deflate_bytes(raw);
            out.insert(out.end(), packed.begin(), packed.end());
            break;
        }
        case CodecKind::kFp16: {
            write_layout_table(out, layers);
            for (const LayerSpec* l : layers) {
                const double* src = params.values.data() + l->offset;
                for (size_t i = 0; i < l->length; ++i) {
                    const uint16_t h = f32_to_f16(static_cast<float>(src[i]));
                    out.push_back(static_cast<uint8_t>(h & 0xff));
                    out.push_back(static_cast<uint8_t>(h >> 8));
                }
            }
            break;
        }
        case CodecKind::kInt8: {
            write_layout_table(out, layers);
            for (const LayerSpec* l : layers) {
                const double* src = params.values.data() + l->offset;
                double max_abs = 0.0;
                for (size_t i = 0; i < l->length; ++i) {
                    max_abs = std::max(max_abs, std::abs(src[i]));
                }
                const float scale = max_abs > 0.0 ? static_cast<float>(max_abs / 127.0) : 1.0f;
                put_f32(out, scale);
                const double s = static_cast<double>(scale);
                for (size_t i = 0; i < l->length; ++i) {
                    long q = std::lround(src[i] / s);
                    q = std::max(-127l, std::min(127l, q));
                    out.push_back(static_cast<uint8_t>(static_cast<int8_t>(q)));
                }
            }
            break;
        }
    }
    return out;
}

CodecKind payload_codec(const std::vector<uint8_t>& payload) {
    if (payload.empty()) throw CodecError("empty payload");
    const uint8_t id = payload[0];
    if (id > 3) throw CodecError("unknown codec id " + std::to_string(id) + " at byte 0");
    return static_cast<CodecKind>(id);
}

ModelParams decode(const uint8_t* data, size_t len) {
    if (len == 0) throw CodecError("empty payload");
    const uint8_t id = data[0];
    switch (id) {
        case 0:
            return deserialize_params(data + 1, len - 1);
        case 1: {
            const auto raw = inflate_bytes(data + 1, len - 1);
            return deserialize_params(raw.data(), raw.size());
        }
        case 2: {
            Reader r{data, len, 1};
            Layout layout = read_layout_table(r);
            std::vector<double> values;
            values.reserve(layout.total_length());
            for (const auto& l : layout.layers()) {
                r.need(2 * l.length, ("fp16 layer '" + l.name + "'").c_str());
                for (size_t i = 0; i < l.length; ++i) {
                    const uint16_t h = static_cast<uint16_t>(data[r.pos]) |
                                       (static_cast<uint16_t>(data[r.pos + 1]) << 8);
                    r.pos += 2;
                    values.push_back(static_cast<double>(f16_to_f32(h)));
                }
            }
            if (r.pos != len) throw CodecError("trailing bytes in fp16 payload");
            return ModelParams(std::move(values), std::move(layout));
        }
        case 3: {
            Reader r{data, len, 1};
            Layout layout = read_layout_table(r);
            std::vector<double> values;
            values.reserve(layout.total_length());
            for (const auto& l : layout.layers()) {
                const float scale = r.f32(("int8 scale of layer '" + l.name + "'").c_str());
                if (!(scale > 0.0f) || !std::isfinite(scale)) {
                    throw CodecError("invalid int8 scale at byte " + std::to_string(r.pos - 4));
                }
                r.need(l.length, ("int8 layer '" + l.name + "'").c_str());
                const double s = static_cast<double>(scale);
                for (size_t i = 0; i < l.length; ++i) {
                    const auto q = static_cast<int8_t>(data[r.pos++]);
                    values.push_back(static_cast<double>(q) * s);
                }
            }
            if (r.pos != len) throw CodecError("trailing bytes in int8 payload");
            return ModelParams(std::move(values), std::move(layout));
        }
        default:
            throw CodecError("unknown codec id " + std::to_string(id) + " at byte 0");
    }
}

ModelParams decode(const std::vector<uint8_t>& payload) {
    return decode(payload.data(), payload.size());
}

}  // namespace fsreal
