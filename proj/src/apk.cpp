#include "apk.hpp"

#include <zlib.h>

#include <algorithm>
#include <set>

#include "bytes.hpp"
#include "error.hpp"

namespace dexpatch {

namespace {

constexpr uint32_t kLocalHeaderSig = 0x04034b50;
constexpr uint32_t kCentralDirSig = 0x02014b50;
constexpr uint32_t kEocdSig = 0x06054b50;
constexpr uint32_t kZip64EocdLocatorSig = 0x07064b50;

uint32_t crc_of(std::span<const uint8_t> bytes) {
    return static_cast<uint32_t>(
        ::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

std::vector<uint8_t> inflate_raw(std::span<const uint8_t> in, size_t expected_size,
                                 const std::string& path) {
    std::vector<uint8_t> out(expected_size);
    z_stream strm{};
    if (inflateInit2(&strm, -MAX_WBITS) != Z_OK)
        fail(Errc::ZipFormat, "inflate init failed");
    strm.next_in = const_cast<Bytef*>(in.data());
    strm.avail_in = static_cast<uInt>(in.size());
    strm.next_out = out.data();
    strm.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&strm, Z_FINISH);
    inflateEnd(&strm);
    if (rc != Z_STREAM_END || strm.total_out != expected_size)
        fail(Errc::ZipFormat, "corrupt deflate stream in " + path);
    return out;
}

std::vector<uint8_t> deflate_raw(std::span<const uint8_t> in) {
    z_stream strm{};
    if (deflateInit2(&strm, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8,
                     Z_DEFAULT_STRATEGY) != Z_OK)
        fail(Errc::ZipFormat, "deflate init failed");
    std::vector<uint8_t> out(deflateBound(&strm, static_cast<uLong>(in.size())));
    strm.next_in = const_cast<Bytef*>(in.data());
    strm.avail_in = static_cast<uInt>(in.size());
    strm.next_out = out.data();
    strm.avail_out = static_cast<uInt>(out.size());
    int rc = deflate(&strm, Z_FINISH);
    size_t produced = strm.total_out;
    deflateEnd(&strm);
    if (rc != Z_STREAM_END) fail(Errc::ZipFormat, "deflate failed");
    out.resize(produced);
    return out;
}

size_t find_eocd(std::span<const uint8_t> bytes) {
    if (bytes.size() < 22) fail(Errc::ZipFormat, "file too small to be a zip archive");
    size_t scan_limit = std::min<size_t>(bytes.size(), 22 + 0xffff);
    for (size_t back = 22; back <= scan_limit; ++back) {
        size_t at = bytes.size() - back;
        if (load_u32(bytes.data() + at) == kEocdSig) {
            uint16_t comment_len = load_u16(bytes.data() + at + 20);
            if (at + 22 + comment_len == bytes.size()) return at;
        }
    }
    fail(Errc::ZipFormat, "end-of-central-directory record not found");
}

}  // namespace

const ZipEntry* ApkArchive::find(std::string_view path) const {
    for (const ZipEntry& e : entries)
        if (e.path == path) return &e;
    return nullptr;
}

ApkArchive open_apk(std::span<const uint8_t> bytes) {
    size_t eocd = find_eocd(bytes);
    ByteReader r(bytes, eocd + 4);
    uint16_t disk = r.u16();
    uint16_t cd_disk = r.u16();
    uint16_t disk_entries = r.u16();
    uint16_t total_entries = r.u16();
    uint32_t cd_size = r.u32();
    uint32_t cd_offset = r.u32();
    if (disk != 0 || cd_disk != 0 || disk_entries != total_entries)
        fail(Errc::ZipFormat, "multi-disk archives are not supported");
    if (total_entries == 0xffff || cd_offset == 0xffffffff || cd_size == 0xffffffff)
        fail(Errc::ZipFormat, "zip64 archives are not supported");
    if (eocd >= 20 &&
        load_u32(bytes.data() + eocd - 20) == kZip64EocdLocatorSig)
        fail(Errc::ZipFormat, "zip64 archives are not supported");
    if (cd_offset > bytes.size() || cd_size > bytes.size() - cd_offset)
        fail(Errc::ZipFormat, "central directory extends past end of file");

    ApkArchive apk;
    std::set<std::string> seen;
    ByteReader cd(bytes, cd_offset);
    for (uint32_t i = 0; i < total_entries; ++i) {
        if (cd.u32() != kCentralDirSig)
            fail(Errc::ZipFormat, "bad central directory signature");
        cd.u16();  // version made by
        cd.u16();  // version needed
        uint16_t flags = cd.u16();
        ZipEntry entry;
        entry.method = cd.u16();
        entry.dos_time = cd.u16();
        entry.dos_date = cd.u16();
        entry.crc32 = cd.u32();
        entry.compressed_size = cd.u32();
        entry.uncompressed_size = cd.u32();
        uint16_t name_len = cd.u16();
        uint16_t extra_len = cd.u16();
        uint16_t comment_len = cd.u16();
        cd.u16();  // disk number
        cd.u16();  // internal attributes
        cd.u32();  // external attributes
        uint32_t local_off = cd.u32();
        auto name = cd.slice(name_len);
        entry.path.assign(name.begin(), name.end());
        cd.slice(extra_len);
        cd.slice(comment_len);

        if (flags & 0x0001)
            fail(Errc::ZipFormat, "encrypted entry " + entry.path);
        if (entry.method != kZipStored && entry.method != kZipDeflated)
            fail(Errc::ZipFormat, "unsupported compression method " +
                                      std::to_string(entry.method) + " for " +
                                      entry.path);
        if (!seen.insert(entry.path).second)
            fail(Errc::ZipFormat, "duplicate entry path " + entry.path);

        // Local header: sizes and crc may be deferred to a data descriptor
        // there; the central directory copy is authoritative.
        ByteReader lh(bytes, local_off);
        if (lh.u32() != kLocalHeaderSig)
            fail(Errc::ZipFormat, "bad local header for " + entry.path);
        lh.u16();  // version needed
        lh.u16();  // flags
        lh.u16();  // method
        lh.u16();  // time
        lh.u16();  // date
        lh.u32();  // crc
        lh.u32();  // compressed size
        lh.u32();  // uncompressed size
        uint16_t lh_name_len = lh.u16();
        uint16_t lh_extra_len = lh.u16();
        lh.slice(lh_name_len);
        lh.slice(lh_extra_len);
        auto payload = lh.slice(entry.compressed_size);
        entry.raw.assign(payload.begin(), payload.end());

        // Eager integrity check, per entry.
        std::vector<uint8_t> plain = zip_extract(entry);
        if (crc_of(plain) != entry.crc32)
            fail(Errc::CrcMismatch, "crc mismatch for " + entry.path);
        apk.entries.push_back(std::move(entry));
    }
    return apk;
}

std::vector<uint8_t> zip_extract(const ZipEntry& entry) {
    if (entry.method == kZipStored) {
        if (entry.raw.size() != entry.uncompressed_size)
            fail(Errc::ZipFormat, "stored entry size mismatch for " + entry.path);
        return entry.raw;
    }
    return inflate_raw(entry.raw, entry.uncompressed_size, entry.path);
}

std::vector<uint8_t> write_zip(const ApkArchive& archive) {
    ByteWriter out;
    std::vector<uint32_t> local_offsets;
    local_offsets.reserve(archive.entries.size());
    for (const ZipEntry& e : archive.entries) {
        local_offsets.push_back(static_cast<uint32_t>(out.size()));
        out.u32(kLocalHeaderSig);
        out.u16(20);  // version needed
        out.u16(0);   // flags
        out.u16(e.method);
        out.u16(e.dos_time);
        out.u16(e.dos_date);
        out.u32(e.crc32);
        out.u32(e.compressed_size);
        out.u32(e.uncompressed_size);
        out.u16(static_cast<uint16_t>(e.path.size()));
        out.u16(0);  // extra length
        out.raw(std::span<const uint8_t>(
            reinterpret_cast<const uint8_t*>(e.path.data()), e.path.size()));
        out.raw(e.raw);
    }
    uint32_t cd_offset = static_cast<uint32_t>(out.size());
    for (size_t i = 0; i < archive.entries.size(); ++i) {
        const ZipEntry& e = archive.entries[i];
        out.u32(kCentralDirSig);
        out.u16(20);  // version made by
        out.u16(20);  // version needed
        out.u16(0);   // flags
        out.u16(e.method);
        out.u16(e.dos_time);
        out.u16(e.dos_date);
        out.u32(e.crc32);
        out.u32(e.compressed_size);
        out.u32(e.uncompressed_size);
        out.u16(static_cast<uint16_t>(e.path.size()));
        out.u16(0);  // extra length
        out.u16(0);  // comment length
        out.u16(0);  // disk number
        out.u16(0);  // internal attributes
        out.u32(0);  // external attributes
        out.u32(local_offsets[i]);
        out.raw(std::span<const uint8_t>(
            reinterpret_cast<const uint8_t*>(e.path.data()), e.path.size()));
    }
    uint32_t cd_size = static_cast<uint32_t>(out.size()) - cd_offset;
    out.u32(kEocdSig);
    out.u16(0);  // disk
    out.u16(0);  // central directory disk
    out.u16(static_cast<uint16_t>(archive.entries.size()));
    out.u16(static_cast<uint16_t>(archive.entries.size()));
    out.u32(cd_size);
    out.u32(cd_offset);
    out.u16(0);  // comment length
    return std::move(out.bytes());
}

std::vector<uint8_t> repack(const ApkArchive& apk, std::span<const uint8_t> new_dex,
                            bool strip_meta) {
    if (!apk.find("classes.dex"))
        fail(Errc::Unsupported, "archive has no classes.dex entry");
    ApkArchive out;
    for (const ZipEntry& e : apk.entries) {
        if (strip_meta && e.path.starts_with("META-INF/")) continue;
        if (e.path == "classes.dex") {
            ZipEntry patched;
            patched.path = e.path;
            patched.method = kZipStored;
            patched.crc32 = crc_of(new_dex);
            patched.compressed_size = static_cast<uint32_t>(new_dex.size());
            patched.uncompressed_size = static_cast<uint32_t>(new_dex.size());
            patched.dos_time = e.dos_time;
            patched.dos_date = e.dos_date;
            patched.raw.assign(new_dex.begin(), new_dex.end());
            out.entries.push_back(std::move(patched));
        } else {
            out.entries.push_back(e);
        }
    }
    return write_zip(out);
}

bool is_multidex(const ApkArchive& apk) {
    for (const ZipEntry& e : apk.entries) {
        if (!e.path.starts_with("classes") || !e.path.ends_with(".dex")) continue;
        std::string_view middle(e.path);
        middle.remove_prefix(7);
        middle.remove_suffix(4);
        if (!middle.empty() &&
            std::all_of(middle.begin(), middle.end(),
                        [](char c) { return c >= '0' && c <= '9'; }))
            return true;
    }
    return false;
}

void add_stored(ApkArchive& apk, std::string path, std::span<const uint8_t> bytes) {
    ZipEntry e;
    e.path = std::move(path);
    e.method = kZipStored;
    e.crc32 = crc_of(bytes);
    e.compressed_size = static_cast<uint32_t>(bytes.size());
    e.uncompressed_size = static_cast<uint32_t>(bytes.size());
    e.raw.assign(bytes.begin(), bytes.end());
    apk.entries.push_back(std::move(e));
}

void add_deflated(ApkArchive& apk, std::string path, std::span<const uint8_t> bytes) {
    ZipEntry e;
    e.path = std::move(path);
    e.method = kZipDeflated;
    e.crc32 = crc_of(bytes);
    e.uncompressed_size = static_cast<uint32_t>(bytes.size());
    e.raw = deflate_raw(bytes);
    e.compressed_size = static_cast<uint32_t>(e.raw.size());
    apk.entries.push_back(std::move(e));
}

}  // namespace dexpatch
