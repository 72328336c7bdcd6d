#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dex_model.hpp"

namespace dexpatch {

struct ParseOptions {
    // Header checksum/signature verification. Disabled by `inspect` so a
    // file with a stale header can still be summarized; structural
    // validation always runs.
    bool verify_checksums = true;
};

struct ParseInfo {
    bool checksum_ok = false;
    bool signature_ok = false;
    uint32_t computed_checksum = 0;
};

// Fully decodes a dex v035 file. Every pool index is range-checked, the
// Adler-32 checksum and SHA-1 signature are verified, and the map list is
// retained. Errors are distinct per failure kind and carry the byte offset.
DexFile parse_dex(std::span<const uint8_t> bytes, const ParseOptions& options = {},
                  ParseInfo* info = nullptr);

// Emits sections in canonical order (header, id pools, class_defs, data
// with the map list at its end), 4-byte aligned where the format requires,
// then repairs the header checksums. parse_dex(write_dex(d)) is
// structurally equal to d, and write is byte-idempotent on its own output.
std::vector<uint8_t> write_dex(const DexFile& dex);

// signature := SHA-1(bytes[32..]), then checksum := Adler-32(bytes[12..]).
// The order matters: the signature is covered by the checksum. Idempotent.
void fix_checksums(std::span<uint8_t> bytes);

}  // namespace dexpatch
