#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dexpatch {

// Minimal zip support for APKs: local headers + central directory + EOCD.
// Zip64, encryption, and multi-disk archives are rejected. Payloads are
// kept exactly as stored; extraction inflates on demand.

inline constexpr uint16_t kZipStored = 0;
inline constexpr uint16_t kZipDeflated = 8;

struct ZipEntry {
    std::string path;
    uint16_t method = kZipStored;
    uint32_t crc32 = 0;
    uint32_t compressed_size = 0;
    uint32_t uncompressed_size = 0;
    uint16_t dos_time = 0;
    uint16_t dos_date = 0;
    std::vector<uint8_t> raw;  // payload bytes exactly as archived
};

struct ApkArchive {
    std::vector<ZipEntry> entries;  // archive order

    const ZipEntry* find(std::string_view path) const;
};

// Enumerates the central directory and CRC-verifies every entry eagerly;
// a mismatch names the failing path. Empty archives are fine.
ApkArchive open_apk(std::span<const uint8_t> bytes);

// Decompressed entry payload.
std::vector<uint8_t> zip_extract(const ZipEntry& entry);

std::vector<uint8_t> write_zip(const ApkArchive& archive);

// classes.dex replaced (stored uncompressed), META-INF/* dropped when
// strip_meta, every other entry copied with its original payload and
// compression method, order preserved.
std::vector<uint8_t> repack(const ApkArchive& apk, std::span<const uint8_t> new_dex,
                            bool strip_meta);

// classes2.dex and beyond; patching multidex APKs is unsupported.
bool is_multidex(const ApkArchive& apk);

// Fixture/builder helpers.
void add_stored(ApkArchive& apk, std::string path, std::span<const uint8_t> bytes);
void add_deflated(ApkArchive& apk, std::string path, std::span<const uint8_t> bytes);

}  // namespace dexpatch
