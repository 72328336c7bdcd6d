#include "bytes.hpp"

namespace dexpatch {

uint32_t read_uleb128(std::span<const uint8_t> bytes, size_t& offset) {
    uint32_t result = 0;
    for (int i = 0; i < 5; ++i) {
        if (offset >= bytes.size())
            fail_at(Errc::Truncated, offset, "uleb128 runs past end of buffer");
        uint8_t b = bytes[offset++];
        if (i == 4 && (b & 0xf0) != 0)
            fail_at(Errc::Malformed, offset - 1, "uleb128 value exceeds 32 bits");
        result |= static_cast<uint32_t>(b & 0x7f) << (7 * i);
        if ((b & 0x80) == 0) return result;
    }
    fail_at(Errc::Malformed, offset, "uleb128 longer than 5 bytes");
}

int32_t read_sleb128(std::span<const uint8_t> bytes, size_t& offset) {
    int32_t result = 0;
    int shift = 0;
    for (int i = 0; i < 5; ++i) {
        if (offset >= bytes.size())
            fail_at(Errc::Truncated, offset, "sleb128 runs past end of buffer");
        uint8_t b = bytes[offset++];
        result |= static_cast<int32_t>(b & 0x7f) << shift;
        shift += 7;
        if ((b & 0x80) == 0) {
            if (shift < 32 && (b & 0x40)) result |= -(1 << shift);
            return result;
        }
    }
    fail_at(Errc::Malformed, offset, "sleb128 longer than 5 bytes");
}

int32_t read_uleb128p1(std::span<const uint8_t> bytes, size_t& offset) {
    return static_cast<int32_t>(read_uleb128(bytes, offset)) - 1;
}

void write_uleb128(std::vector<uint8_t>& out, uint32_t value) {
    do {
        uint8_t b = value & 0x7f;
        value >>= 7;
        if (value != 0) b |= 0x80;
        out.push_back(b);
    } while (value != 0);
}

void write_sleb128(std::vector<uint8_t>& out, int32_t value) {
    bool more = true;
    while (more) {
        uint8_t b = value & 0x7f;
        value >>= 7;
        if ((value == 0 && (b & 0x40) == 0) || (value == -1 && (b & 0x40) != 0))
            more = false;
        else
            b |= 0x80;
        out.push_back(b);
    }
}

void write_uleb128p1(std::vector<uint8_t>& out, int32_t value) {
    write_uleb128(out, static_cast<uint32_t>(value + 1));
}

size_t uleb128_length(uint32_t value) {
    size_t n = 1;
    while (value >>= 7) ++n;
    return n;
}

}  // namespace dexpatch
