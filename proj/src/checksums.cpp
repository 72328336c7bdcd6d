#include "checksums.hpp"

#include <openssl/evp.h>
#include <zlib.h>

namespace dexpatch {

uint32_t adler32_checksum(std::span<const uint8_t> bytes) {
    uLong sum = adler32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed large buffers in chunks.
    size_t off = 0;
    while (off < bytes.size()) {
        uInt chunk = static_cast<uInt>(std::min<size_t>(bytes.size() - off, 1u << 30));
        sum = adler32(sum, bytes.data() + off, chunk);
        off += chunk;
    }
    return static_cast<uint32_t>(sum);
}

std::array<uint8_t, 20> sha1_digest(std::span<const uint8_t> bytes) {
    std::array<uint8_t, 20> digest{};
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha1(), nullptr);
    return digest;
}

}  // namespace dexpatch
