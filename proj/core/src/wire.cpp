#include "fsreal/wire.hpp"

#include <cstring>

#include "fsreal/errors.hpp"
#include "fsreal/serialize.hpp"

namespace fsreal {

bool Frame::operator==(const Frame& other) const {
    return version == other.version && msg_type == other.msg_type && round == other.round &&
           sender_id == other.sender_id && codec_id == other.codec_id &&
           payload == other.payload;
}

std::vector<uint8_t> frame_encode(const Frame& frame) {
    std::vector<uint8_t> out;
    out.reserve(frame.wire_size());
    for (uint8_t b : kFrameMagic) out.push_back(b);
    out.push_back(frame.version);
    out.push_back(static_cast<uint8_t>(frame.msg_type));
    put_u32(out, frame.round);
    put_u64(out, frame.sender_id);
    out.push_back(frame.codec_id);
    put_u32(out, static_cast<uint32_t>(frame.payload.size()));
    out.insert(out.end(), frame.payload.begin(), frame.payload.end());
    return out;
}

uint32_t header_payload_len(const uint8_t* header) { return get_u32(header + 19); }

Frame frame_decode(const uint8_t* data, size_t len) {
    if (len < kFrameHeaderBytes) {
        throw FramingError("header", len, "short read: need 23 bytes, have " +
                                              std::to_string(len));
    }
    if (std::memcmp(data, kFrameMagic, 4) != 0) {
        throw FramingError("magic", 0, "expected \"FSRL\"");
    }
    Frame frame;
    frame.version = data[4];
    if (frame.version != kWireVersion) {
        throw FramingError("version", 4,
                           "unknown version " + std::to_string(frame.version));
    }
    const uint8_t type = data[5];
    if (type > static_cast<uint8_t>(MsgType::kShutdown)) {
        throw FramingError("msg_type", 5, "unknown message type " + std::to_string(type));
    }
    frame.msg_type = static_cast<MsgType>(type);
    frame.round = get_u32(data + 6);
    frame.sender_id = get_u64(data + 10);
    frame.codec_id = data[18];
    const uint32_t payload_len = get_u32(data + 19);
    if (len < kFrameHeaderBytes + payload_len) {
        throw FramingError("payload", len,
                           "short read: payload_len " + std::to_string(payload_len) +
                               " but only " + std::to_string(len - kFrameHeaderBytes) +
                               " payload bytes present");
    }
    if (len > kFrameHeaderBytes + payload_len) {
        throw FramingError("payload_len", 19,
                           "frame is " + std::to_string(len) + " bytes but header declares " +
                               std::to_string(kFrameHeaderBytes + payload_len));
    }
    frame.payload.assign(data + kFrameHeaderBytes, data + len);
    return frame;
}

Frame frame_decode(const std::vector<uint8_t>& bytes) {
    return frame_decode(bytes.data(), bytes.size());
}

}  // namespace fsreal
