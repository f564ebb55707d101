#include <doctest.h>

#include "fsreal/errors.hpp"
#include "fsreal/rng.hpp"
#include "fsreal/wire.hpp"

using namespace fsreal;

TEST_CASE("hello frame: exact 23-byte layout") {
    Frame hello;
    hello.msg_type = MsgType::kHello;
    const auto bytes = frame_encode(hello);
    REQUIRE(bytes.size() == 23);
    CHECK(bytes[0] == 0x46);  // F
    CHECK(bytes[1] == 0x53);  // S
    CHECK(bytes[2] == 0x52);  // R
    CHECK(bytes[3] == 0x4c);  // L
    CHECK(bytes[4] == 0x01);  // version
    CHECK(bytes[5] == 0x00);  // hello
    for (size_t i = 6; i < 23; ++i) CHECK(bytes[i] == 0x00);
}

TEST_CASE("frame fields land at the documented offsets") {
    Frame f;
    f.msg_type = MsgType::kModelUpload;
    f.round = 0x01020304;
    f.sender_id = 0x1122334455667788ULL;
    f.codec_id = 3;
    f.payload = {0xaa, 0xbb};
    const auto bytes = frame_encode(f);
    REQUIRE(bytes.size() == 25);
    CHECK(bytes[5] == 2);
    CHECK(bytes[6] == 0x04);  // round, little-endian
    CHECK(bytes[9] == 0x01);
    CHECK(bytes[10] == 0x88);  // sender_id, little-endian
    CHECK(bytes[17] == 0x11);
    CHECK(bytes[18] == 3);
    CHECK(bytes[19] == 2);  // payload_len
    CHECK(bytes[23] == 0xaa);
    CHECK(header_payload_len(bytes.data()) == 2);
}

TEST_CASE("fuzzed frames round-trip exactly") {
    Rng rng(99);
    for (int i = 0; i < 10000; ++i) {
        Frame f;
        f.msg_type = static_cast<MsgType>(rng.next_below(5));
        f.round = static_cast<uint32_t>(rng.next_u64());
        f.sender_id = rng.next_u64();
        f.codec_id = static_cast<uint8_t>(rng.next_below(4));
        f.payload.resize(rng.next_below(64));
        for (auto& b : f.payload) b = static_cast<uint8_t>(rng.next_below(256));
        const auto bytes = frame_encode(f);
        const Frame back = frame_decode(bytes);
        CHECK(back == f);
    }
}

TEST_CASE("any truncation fails with a framing error, never a crash") {
    Frame f;
    f.msg_type = MsgType::kTaskBroadcast;
    f.round = 7;
    f.sender_id = 42;
    f.payload = {1, 2, 3, 4, 5, 6, 7, 8};
    const auto bytes = frame_encode(f);
    for (size_t cut = 0; cut < bytes.size(); ++cut) {
        CHECK_THROWS_AS(frame_decode(bytes.data(), cut), FramingError);
    }
}

TEST_CASE("framing errors name the field and offset") {
    Frame f;
    const auto good = frame_encode(f);

    auto bad_magic = good;
    bad_magic[0] = 'X';
    try {
        frame_decode(bad_magic);
        FAIL("expected FramingError");
    } catch (const FramingError& e) {
        CHECK(e.field() == "magic");
        CHECK(e.offset() == 0);
    }

    auto bad_version = good;
    bad_version[4] = 9;
    try {
        frame_decode(bad_version);
        FAIL("expected FramingError");
    } catch (const FramingError& e) {
        CHECK(e.field() == "version");
        CHECK(e.offset() == 4);
    }

    auto bad_type = good;
    bad_type[5] = 200;
    CHECK_THROWS_AS(frame_decode(bad_type), FramingError);

    auto bad_len = good;
    bad_len.push_back(0xff);  // trailing byte beyond declared payload_len
    try {
        frame_decode(bad_len);
        FAIL("expected FramingError");
    } catch (const FramingError& e) {
        CHECK(e.field() == "payload_len");
        CHECK(e.offset() == 19);
    }
}
