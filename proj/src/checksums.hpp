#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace dexpatch {

// Header integrity primitives. Adler-32 comes from zlib, SHA-1 from
// OpenSSL's EVP interface; the tests check both against independent
// reference implementations and published vectors.

uint32_t adler32_checksum(std::span<const uint8_t> bytes);
std::array<uint8_t, 20> sha1_digest(std::span<const uint8_t> bytes);

}  // namespace dexpatch
