#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"

namespace dexpatch {

// Little-endian primitive and ULEB128/SLEB128 access over a byte buffer.
// All reads are bounds-checked and throw with the failing offset.

uint32_t read_uleb128(std::span<const uint8_t> bytes, size_t& offset);
int32_t read_sleb128(std::span<const uint8_t> bytes, size_t& offset);
// uleb128p1: value encoded as uleb128(value + 1); -1 means "absent".
int32_t read_uleb128p1(std::span<const uint8_t> bytes, size_t& offset);

void write_uleb128(std::vector<uint8_t>& out, uint32_t value);
void write_sleb128(std::vector<uint8_t>& out, int32_t value);
void write_uleb128p1(std::vector<uint8_t>& out, int32_t value);

size_t uleb128_length(uint32_t value);

class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> bytes, size_t offset = 0)
        : bytes_(bytes), offset_(offset) {}

    size_t offset() const { return offset_; }
    size_t size() const { return bytes_.size(); }
    size_t remaining() const { return bytes_.size() - offset_; }

    void seek(size_t offset) {
        if (offset > bytes_.size())
            fail_at(Errc::Truncated, offset, "seek past end of buffer");
        offset_ = offset;
    }

    uint8_t u8() {
        require(1);
        return bytes_[offset_++];
    }

    uint16_t u16() {
        require(2);
        uint16_t v = static_cast<uint16_t>(bytes_[offset_] | (bytes_[offset_ + 1] << 8));
        offset_ += 2;
        return v;
    }

    uint32_t u32() {
        require(4);
        uint32_t v = static_cast<uint32_t>(bytes_[offset_]) |
                     (static_cast<uint32_t>(bytes_[offset_ + 1]) << 8) |
                     (static_cast<uint32_t>(bytes_[offset_ + 2]) << 16) |
                     (static_cast<uint32_t>(bytes_[offset_ + 3]) << 24);
        offset_ += 4;
        return v;
    }

    uint32_t uleb() { return read_uleb128(bytes_, offset_); }
    int32_t sleb() { return read_sleb128(bytes_, offset_); }
    int32_t ulebp1() { return read_uleb128p1(bytes_, offset_); }

    std::span<const uint8_t> slice(size_t count) {
        require(count);
        auto s = bytes_.subspan(offset_, count);
        offset_ += count;
        return s;
    }

    void require(size_t count) const {
        if (count > remaining())
            fail_at(Errc::Truncated, offset_, "read past end of buffer");
    }

private:
    std::span<const uint8_t> bytes_;
    size_t offset_;
};

class ByteWriter {
public:
    std::vector<uint8_t>& bytes() { return out_; }
    const std::vector<uint8_t>& bytes() const { return out_; }
    size_t size() const { return out_.size(); }

    void u8(uint8_t v) { out_.push_back(v); }

    void u16(uint16_t v) {
        out_.push_back(static_cast<uint8_t>(v));
        out_.push_back(static_cast<uint8_t>(v >> 8));
    }

    void u32(uint32_t v) {
        out_.push_back(static_cast<uint8_t>(v));
        out_.push_back(static_cast<uint8_t>(v >> 8));
        out_.push_back(static_cast<uint8_t>(v >> 16));
        out_.push_back(static_cast<uint8_t>(v >> 24));
    }

    void uleb(uint32_t v) { write_uleb128(out_, v); }

    void raw(std::span<const uint8_t> bytes) {
        out_.insert(out_.end(), bytes.begin(), bytes.end());
    }

    void pad_to(size_t alignment) {
        while (out_.size() % alignment != 0) out_.push_back(0);
    }

    // Back-patch a previously reserved u32 slot.
    void patch_u32(size_t at, uint32_t v) {
        out_[at] = static_cast<uint8_t>(v);
        out_[at + 1] = static_cast<uint8_t>(v >> 8);
        out_[at + 2] = static_cast<uint8_t>(v >> 16);
        out_[at + 3] = static_cast<uint8_t>(v >> 24);
    }

private:
    std::vector<uint8_t> out_;
};

inline uint16_t load_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

inline uint32_t load_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline void store_u32(uint8_t* p, uint32_t v) {
    p[0] = static_cast<uint8_t>(v);
    p[1] = static_cast<uint8_t>(v >> 8);
    p[2] = static_cast<uint8_t>(v >> 16);
    p[3] = static_cast<uint8_t>(v >> 24);
}

}  // namespace dexpatch
