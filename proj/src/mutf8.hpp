#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dexpatch {

// Modified UTF-8 as used by dex string_data items. Strings are modeled as
// UTF-16 code unit sequences: that is the unit MUTF-8 encodes (supplementary
// characters stay surrogate pairs, each unit coded in 3 bytes) and the order
// the string pool is sorted by. U+0000 is coded as 0xC0 0x80, so a raw 0x00
// byte is always the terminator.

// Decodes the NUL-terminated payload starting at `offset`; advances `offset`
// past the terminator.
std::u16string decode_mutf8(std::span<const uint8_t> bytes, size_t& offset);

// Encodes the payload only (no uleb length prefix, no terminator).
std::vector<uint8_t> encode_mutf8(const std::u16string& s);

// UTF-8 conversions for the config/CLI surface. Descriptors are ASCII in
// practice; unpaired surrogates survive as WTF-8 so listings stay lossless.
std::string utf16_to_utf8(const std::u16string& s);
std::u16string utf8_to_utf16(std::string_view s);

}  // namespace dexpatch
