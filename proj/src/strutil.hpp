#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

namespace dexpatch {

inline std::string hex8(uint8_t v) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "0x%02x", v);
    return buf;
}

inline std::string hex16(uint16_t v) {
    char buf[12];
    std::snprintf(buf, sizeof(buf), "0x%04x", v);
    return buf;
}

inline std::string hex32(uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", v);
    return buf;
}

}  // namespace dexpatch
