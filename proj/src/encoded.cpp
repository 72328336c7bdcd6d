#include "encoded.hpp"

#include <cstdlib>
#include <map>

#include "bytes.hpp"
#include "error.hpp"
#include "strutil.hpp"

namespace dexpatch {

namespace {

enum ValueType : uint8_t {
    kValueByte = 0x00,
    kValueShort = 0x02,
    kValueChar = 0x03,
    kValueInt = 0x04,
    kValueLong = 0x06,
    kValueFloat = 0x10,
    kValueDouble = 0x11,
    kValueString = 0x17,
    kValueType = 0x18,
    kValueField = 0x19,
    kValueMethod = 0x1a,
    kValueEnum = 0x1b,
    kValueArray = 0x1c,
    kValueAnnotation = 0x1d,
    kValueNull = 0x1e,
    kValueBoolean = 0x1f,
};

// Walks one encoded_value; when refs != nullptr, records whether any
// pool-index value type occurs (recursively).
void walk_value(std::span<const uint8_t> bytes, size_t& offset, bool* refs);

void walk_array(std::span<const uint8_t> bytes, size_t& offset, bool* refs) {
    uint32_t count = read_uleb128(bytes, offset);
    for (uint32_t i = 0; i < count; ++i) walk_value(bytes, offset, refs);
}

void walk_annotation(std::span<const uint8_t> bytes, size_t& offset, bool* refs) {
    read_uleb128(bytes, offset);  // type_idx
    uint32_t count = read_uleb128(bytes, offset);
    for (uint32_t i = 0; i < count; ++i) {
        read_uleb128(bytes, offset);  // name_idx
        walk_value(bytes, offset, refs);
    }
    if (refs) *refs = true;  // annotations always carry type/name indices
}

void walk_value(std::span<const uint8_t> bytes, size_t& offset, bool* refs) {
    if (offset >= bytes.size())
        fail_at(Errc::Truncated, offset, "encoded value runs past end");
    uint8_t head = bytes[offset++];
    uint8_t type = head & 0x1f;
    uint8_t arg = head >> 5;

    auto take = [&](size_t n) {
        if (offset + n > bytes.size())
            fail_at(Errc::Truncated, offset, "encoded value payload truncated");
        offset += n;
    };

    switch (type) {
        case kValueByte:
        case kValueShort:
        case kValueChar:
        case kValueInt:
        case kValueLong:
        case kValueFloat:
        case kValueDouble:
            take(arg + 1u);
            break;
        case kValueString:
        case kValueType:
        case kValueField:
        case kValueMethod:
        case kValueEnum:
            take(arg + 1u);
            if (refs) *refs = true;
            break;
        case kValueArray:
            walk_array(bytes, offset, refs);
            break;
        case kValueAnnotation:
            walk_annotation(bytes, offset, refs);
            break;
        case kValueNull:
        case kValueBoolean:
            break;
        default:
            fail_at(Errc::Malformed, offset - 1,
                    "unknown encoded value type " + hex8(type));
    }
}

}  // namespace

void skip_encoded_value(std::span<const uint8_t> bytes, size_t& offset) {
    walk_value(bytes, offset, nullptr);
}

void skip_encoded_array(std::span<const uint8_t> bytes, size_t& offset) {
    walk_array(bytes, offset, nullptr);
}

void skip_encoded_annotation(std::span<const uint8_t> bytes, size_t& offset) {
    walk_annotation(bytes, offset, nullptr);
}

bool encoded_array_has_pool_refs(std::span<const uint8_t> bytes) {
    bool refs = false;
    size_t offset = 0;
    walk_array(bytes, offset, &refs);
    return refs;
}

void skip_debug_info(std::span<const uint8_t> bytes, size_t& offset) {
    read_uleb128(bytes, offset);  // line_start
    uint32_t params = read_uleb128(bytes, offset);
    for (uint32_t i = 0; i < params; ++i) read_uleb128p1(bytes, offset);
    for (;;) {
        if (offset >= bytes.size())
            fail_at(Errc::Truncated, offset, "debug info runs past end");
        uint8_t op = bytes[offset++];
        switch (op) {
            case 0x00:  // DBG_END_SEQUENCE
                return;
            case 0x01:  // DBG_ADVANCE_PC
            case 0x05:  // DBG_END_LOCAL
            case 0x06:  // DBG_RESTART_LOCAL
                read_uleb128(bytes, offset);
                break;
            case 0x02:  // DBG_ADVANCE_LINE
                read_sleb128(bytes, offset);
                break;
            case 0x03:  // DBG_START_LOCAL
                read_uleb128(bytes, offset);
                read_uleb128p1(bytes, offset);
                read_uleb128p1(bytes, offset);
                break;
            case 0x04:  // DBG_START_LOCAL_EXTENDED
                read_uleb128(bytes, offset);
                read_uleb128p1(bytes, offset);
                read_uleb128p1(bytes, offset);
                read_uleb128p1(bytes, offset);
                break;
            case 0x09:  // DBG_SET_FILE
                read_uleb128p1(bytes, offset);
                break;
            default:  // 0x07, 0x08, specials >= 0x0a: no operands
                break;
        }
    }
}

TryBlob decode_tries(std::span<const uint8_t> blob, uint16_t tries_size) {
    TryBlob out;
    ByteReader r(blob);
    struct RawTry {
        uint32_t start_addr;
        uint16_t insn_count;
        uint16_t handler_off;
    };
    std::vector<RawTry> raw;
    raw.reserve(tries_size);
    for (uint16_t i = 0; i < tries_size; ++i) {
        RawTry t;
        t.start_addr = r.u32();
        t.insn_count = r.u16();
        t.handler_off = r.u16();
        raw.push_back(t);
    }

    size_t list_start = r.offset();
    size_t offset = list_start;
    uint32_t handler_count = read_uleb128(blob, offset);
    std::map<uint16_t, uint32_t> off_to_index;
    for (uint32_t i = 0; i < handler_count; ++i) {
        off_to_index[static_cast<uint16_t>(offset - list_start)] = i;
        CatchHandler h;
        int32_t size = read_sleb128(blob, offset);
        uint32_t pairs = static_cast<uint32_t>(std::abs(size));
        for (uint32_t p = 0; p < pairs; ++p) {
            uint32_t type_idx = read_uleb128(blob, offset);
            uint32_t addr = read_uleb128(blob, offset);
            h.type_addr_pairs.emplace_back(type_idx, addr);
        }
        if (size <= 0) {
            h.has_catch_all = true;
            h.catch_all_addr = read_uleb128(blob, offset);
        }
        out.handlers.push_back(std::move(h));
    }

    for (const RawTry& t : raw) {
        auto it = off_to_index.find(t.handler_off);
        if (it == off_to_index.end())
            fail_at(Errc::Malformed, list_start + t.handler_off,
                    "try item handler offset does not name a handler");
        out.tries.push_back({t.start_addr, t.insn_count, it->second});
    }
    return out;
}

std::vector<uint8_t> encode_tries(const TryBlob& blob) {
    // Serialize the handler list first so try items can name byte offsets.
    std::vector<uint8_t> list;
    std::vector<uint16_t> handler_offs;
    write_uleb128(list, static_cast<uint32_t>(blob.handlers.size()));
    for (const CatchHandler& h : blob.handlers) {
        handler_offs.push_back(static_cast<uint16_t>(list.size()));
        int32_t size = static_cast<int32_t>(h.type_addr_pairs.size());
        write_sleb128(list, h.has_catch_all ? -size : size);
        for (auto [type_idx, addr] : h.type_addr_pairs) {
            write_uleb128(list, type_idx);
            write_uleb128(list, addr);
        }
        if (h.has_catch_all) write_uleb128(list, h.catch_all_addr);
    }

    ByteWriter w;
    for (const TryItem& t : blob.tries) {
        w.u32(t.start_addr);
        w.u16(t.insn_count);
        w.u16(handler_offs.at(t.handler_index));
    }
    w.raw(list);
    return std::move(w.bytes());
}

}  // namespace dexpatch
