#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fsreal {

// Hex-encoded SHA-256; used for payload and final-model integrity checks
// in event logs and the replay verifier.
std::string sha256_hex(const uint8_t* data, size_t len);
std::string sha256_hex(const std::vector<uint8_t>& data);

std::string base64_encode(const std::vector<uint8_t>& data);
std::vector<uint8_t> base64_decode(const std::string& text);

}  // namespace fsreal
