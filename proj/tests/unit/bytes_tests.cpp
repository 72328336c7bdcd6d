#include <doctest.h>

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "bytes.hpp"
#include "error.hpp"
#include "reference.hpp"

using namespace dexpatch;
using namespace dexpatch::test;

namespace {

std::vector<uint8_t> uleb(uint32_t v) {
    std::vector<uint8_t> out;
    write_uleb128(out, v);
    return out;
}

std::vector<uint8_t> sleb(int32_t v) {
    std::vector<uint8_t> out;
    write_sleb128(out, v);
    return out;
}

}  // namespace

TEST_CASE("uleb128 known encodings") {
    CHECK(uleb(0) == std::vector<uint8_t>{0x00});
    CHECK(uleb(1) == std::vector<uint8_t>{0x01});
    CHECK(uleb(127) == std::vector<uint8_t>{0x7f});
    CHECK(uleb(128) == std::vector<uint8_t>{0x80, 0x01});
    CHECK(uleb(16256) == std::vector<uint8_t>{0x80, 0x7f});
    CHECK(uleb(2231) == std::vector<uint8_t>{0xb7, 0x11});
    CHECK(uleb(0xffffffffu) == std::vector<uint8_t>{0xff, 0xff, 0xff, 0xff, 0x0f});
}

TEST_CASE("uleb128 decode matches the reference and round-trips") {
    std::mt19937 rng(7);
    for (int i = 0; i < 2000; ++i) {
        uint32_t v = rng();
        if (i < 40) v &= 0x7f;  // force some one-byte values
        auto bytes = uleb(v);
        CHECK(bytes == ref_uleb128(v));
        CHECK(uleb128_length(v) == bytes.size());

        size_t off = 0;
        CHECK(read_uleb128(bytes, off) == v);
        CHECK(off == bytes.size());

        size_t used = 0;
        CHECK(ref_decode_uleb128(bytes, used) == v);
        CHECK(used == bytes.size());
    }
}

TEST_CASE("uleb128 error handling") {
    std::vector<uint8_t> dangling{0x80};
    size_t off = 0;
    CHECK_THROWS_AS(read_uleb128(dangling, off), DexError);

    // 5th byte may only contribute 4 bits
    std::vector<uint8_t> wide{0xff, 0xff, 0xff, 0xff, 0x7f};
    off = 0;
    try {
        read_uleb128(wide, off);
        FAIL("expected DexError");
    } catch (const DexError& e) {
        CHECK(e.code() == Errc::Malformed);
    }
}

TEST_CASE("sleb128 known encodings and round-trip") {
    CHECK(sleb(0) == std::vector<uint8_t>{0x00});
    CHECK(sleb(1) == std::vector<uint8_t>{0x01});
    CHECK(sleb(-1) == std::vector<uint8_t>{0x7f});
    CHECK(sleb(-128) == std::vector<uint8_t>{0x80, 0x7f});
    CHECK(sleb(100) == std::vector<uint8_t>{0xe4, 0x00});

    std::mt19937 rng(11);
    std::vector<int32_t> samples{0,
                                 -1,
                                 63,
                                 64,
                                 -64,
                                 -65,
                                 std::numeric_limits<int32_t>::max(),
                                 std::numeric_limits<int32_t>::min()};
    for (int i = 0; i < 2000; ++i) samples.push_back(static_cast<int32_t>(rng()));
    for (int32_t v : samples) {
        auto bytes = sleb(v);
        size_t off = 0;
        CHECK(read_sleb128(bytes, off) == v);
        CHECK(off == bytes.size());
    }
}

TEST_CASE("uleb128p1 encodes value plus one") {
    std::vector<uint8_t> out;
    write_uleb128p1(out, -1);
    CHECK(out == std::vector<uint8_t>{0x00});
    out.clear();
    write_uleb128p1(out, 0);
    CHECK(out == std::vector<uint8_t>{0x01});

    for (int32_t v : {-1, 0, 1, 127, 128, 0x7ffffffe}) {
        out.clear();
        write_uleb128p1(out, v);
        size_t off = 0;
        CHECK(read_uleb128p1(out, off) == v);
    }
}

TEST_CASE("byte reader primitives are little-endian and bounds-checked") {
    std::vector<uint8_t> raw{0x78, 0x56, 0x34, 0x12, 0xaa};
    ByteReader r(raw);
    CHECK(r.u32() == 0x12345678u);
    CHECK(r.u8() == 0xaa);
    CHECK(r.remaining() == 0);
    CHECK_THROWS_AS(r.u8(), DexError);

    ByteReader r2(raw);
    CHECK(r2.u16() == 0x5678u);
    CHECK_THROWS_AS(r2.seek(6), DexError);
}

TEST_CASE("byte writer round-trips through byte reader") {
    ByteWriter w;
    w.u8(0x01);
    w.u16(0xbeef);
    w.u32(0xdeadbeef);
    w.uleb(300);
    w.pad_to(4);
    CHECK(w.size() % 4 == 0);

    ByteReader r(w.bytes());
    CHECK(r.u8() == 0x01);
    CHECK(r.u16() == 0xbeef);
    CHECK(r.u32() == 0xdeadbeefu);
    CHECK(r.uleb() == 300u);
}
