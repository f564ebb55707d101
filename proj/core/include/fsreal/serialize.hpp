#pragma once

#include <cstdint>
#include <vector>

#include "fsreal/model.hpp"

namespace fsreal {

// Canonical model serialization: a layout table (layer count u8, then per
// layer: name length u8, name bytes, length u32 LE) followed by each
// layer's values as little-endian IEEE-754 FP32 in layout order.
//
// When `mask` is non-null, only layers in the mask are written; the layout
// table then describes exactly the transmitted layers, so the receiver
// recovers the upload mask from the payload itself.

std::vector<uint8_t> serialize_params(const ModelParams& params,
                                      const std::set<std::string>* mask = nullptr);

ModelParams deserialize_params(const uint8_t* data, size_t len);

size_t serialized_size(const Layout& layout, const std::set<std::string>* mask = nullptr);

// Little-endian scalar helpers shared by serialize, codec, and wire.
void put_u32(std::vector<uint8_t>& out, uint32_t v);
void put_u64(std::vector<uint8_t>& out, uint64_t v);
void put_f32(std::vector<uint8_t>& out, float v);
uint32_t get_u32(const uint8_t* p);
uint64_t get_u64(const uint8_t* p);
float get_f32(const uint8_t* p);

}  // namespace fsreal
