#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace dexpatch {

// Failure classes. The C API and the CLI collapse these onto the
// exit-code taxonomy (format / patch / io), so new values must be added
// to the mapping in capi.cpp as well.
enum class Errc {
    Io,
    BadMagic,
    UnsupportedVersion,
    BadEndianTag,
    BadHeader,
    Truncated,
    ChecksumMismatch,
    SignatureMismatch,
    Malformed,          // uleb128 / mutf-8 / item grammar violations
    DanglingIndex,
    Validation,
    MalformedCode,
    Capacity,
    NameCollision,
    Unsupported,
    ZipFormat,
    CrcMismatch,
    BlacklistSyntax,
};

class DexError : public std::runtime_error {
public:
    DexError(Errc code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    DexError(Errc code, std::string message, size_t offset)
        : std::runtime_error(std::move(message)), code_(code), offset_(offset) {}

    Errc code() const { return code_; }
    std::optional<size_t> offset() const { return offset_; }

private:
    Errc code_;
    std::optional<size_t> offset_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw DexError(code, message);
}

// Parse-path errors always name the byte offset at which decoding failed.
[[noreturn]] inline void fail_at(Errc code, size_t offset, const std::string& message) {
    throw DexError(code, message + " at offset " + std::to_string(offset), offset);
}

}  // namespace dexpatch
