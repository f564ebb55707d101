#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "fsreal/model.hpp"

namespace fsreal {

enum class CodecKind : uint8_t {
    kNone = 0,
    kGzip = 1,
    kFp16 = 2,
    kInt8 = 3,
};

CodecKind codec_from_string(const std::string& s);
std::string to_string(CodecKind kind);

// Payload layout (bit-exact): [codec id u8][layout table][per-layer data].
//   none: FP32 LE values.
//   gzip: the codec id byte followed by the zlib-deflated canonical
//         serialization (layout table + FP32 data).
//   fp16: values as IEEE-754 half, round-to-nearest-even, 2 bytes each.
//   int8: per layer a scale f32 LE then one signed byte per value;
//         symmetric quantization q = round(x/scale), scale = max|x|/127
//         (scale = 1 for an all-zero layer).
// Frame headers are never compressed; the codec applies to the payload only.
std::vector<uint8_t> encode(const ModelParams& params, CodecKind codec,
                            const std::set<std::string>* mask = nullptr);

ModelParams decode(const uint8_t* data, size_t len);
ModelParams decode(const std::vector<uint8_t>& payload);

// Codec id recorded in the payload's first byte.
CodecKind payload_codec(const std::vector<uint8_t>& payload);

// FP32 <-> FP16 conversion, round-to-nearest-even with overflow flushed to
// the largest finite half. Exposed for the quantization-error tests.
uint16_t f32_to_f16(float value);
float f16_to_f32(uint16_t bits);

}  // namespace fsreal
