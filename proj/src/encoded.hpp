#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dexpatch {

// Length/skip helpers for the ULEB-based item grammars the model carries as
// opaque bytes. These never interpret values; they only find item ends (and,
// for encoded arrays, report whether any pool-referencing value type occurs).

// Advances offset past one encoded_value.
void skip_encoded_value(std::span<const uint8_t> bytes, size_t& offset);

// Advances offset past one encoded_array (uleb count + values).
void skip_encoded_array(std::span<const uint8_t> bytes, size_t& offset);

// Advances offset past one encoded_annotation.
void skip_encoded_annotation(std::span<const uint8_t> bytes, size_t& offset);

// True if the encoded_array at `bytes` contains any string/type/field/
// method/enum/annotation value (anything whose payload is a pool index).
bool encoded_array_has_pool_refs(std::span<const uint8_t> bytes);

// Advances offset past one debug_info_item (header + opcodes through
// DBG_END_SEQUENCE).
void skip_debug_info(std::span<const uint8_t> bytes, size_t& offset);

// Exception table of one code item, decoded far enough to relocate and to
// remap handler type indices. handler_off values are recomputed on encode.
struct TryItem {
    uint32_t start_addr = 0;
    uint16_t insn_count = 0;
    uint32_t handler_index = 0;  // position in TryBlob::handlers
};

struct CatchHandler {
    std::vector<std::pair<uint32_t, uint32_t>> type_addr_pairs;  // (type_idx, addr)
    bool has_catch_all = false;
    uint32_t catch_all_addr = 0;
};

struct TryBlob {
    std::vector<TryItem> tries;
    std::vector<CatchHandler> handlers;
};

TryBlob decode_tries(std::span<const uint8_t> blob, uint16_t tries_size);
std::vector<uint8_t> encode_tries(const TryBlob& blob);

}  // namespace dexpatch
