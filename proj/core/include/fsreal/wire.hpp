#pragma once

#include <cstdint>
#include <vector>

namespace fsreal {

// Framed wire protocol. Header layout, all integers little-endian:
//   bytes  0..3   magic "FSRL"
//   byte   4      version (1)
//   byte   5      msg_type
//   bytes  6..9   round u32
//   bytes 10..17  sender_id u64
//   byte  18      codec_id
//   bytes 19..22  payload_len u32
//   bytes 23..    payload
inline constexpr size_t kFrameHeaderBytes = 23;
inline constexpr uint8_t kWireVersion = 1;
inline constexpr uint8_t kFrameMagic[4] = {0x46, 0x53, 0x52, 0x4c};  // "FSRL"

enum class MsgType : uint8_t {
    kHello = 0,
    kTaskBroadcast = 1,
    kModelUpload = 2,
    kAck = 3,
    kShutdown = 4,
};

struct Frame {
    uint8_t version = kWireVersion;
    MsgType msg_type = MsgType::kHello;
    uint32_t round = 0;
    uint64_t sender_id = 0;
    uint8_t codec_id = 0;
    std::vector<uint8_t> payload;

    size_t wire_size() const { return kFrameHeaderBytes + payload.size(); }
    bool operator==(const Frame& other) const;
};

std::vector<uint8_t> frame_encode(const Frame& frame);

// Exact inverse of frame_encode over a complete frame buffer. Throws
// FramingError naming the offending field and byte offset on bad magic,
// unknown version or message type, short reads, and length mismatches.
Frame frame_decode(const uint8_t* data, size_t len);
Frame frame_decode(const std::vector<uint8_t>& bytes);

// Payload length parsed from a 23-byte header (for streaming reads).
uint32_t header_payload_len(const uint8_t* header);

}  // namespace fsreal
