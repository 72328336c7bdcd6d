#include "mutf8.hpp"

#include "error.hpp"

namespace dexpatch {

std::u16string decode_mutf8(std::span<const uint8_t> bytes, size_t& offset) {
    std::u16string out;
    for (;;) {
        if (offset >= bytes.size())
            fail_at(Errc::Truncated, offset, "unterminated mutf-8 string");
        uint8_t b0 = bytes[offset++];
        if (b0 == 0) return out;
        if (b0 < 0x80) {
            out.push_back(b0);
            continue;
        }
        if ((b0 & 0xe0) == 0xc0) {
            if (offset >= bytes.size())
                fail_at(Errc::Truncated, offset, "truncated mutf-8 sequence");
            uint8_t b1 = bytes[offset++];
            if ((b1 & 0xc0) != 0x80)
                fail_at(Errc::Malformed, offset - 1, "bad mutf-8 continuation byte");
            out.push_back(static_cast<char16_t>(((b0 & 0x1f) << 6) | (b1 & 0x3f)));
            continue;
        }
        if ((b0 & 0xf0) == 0xe0) {
            if (offset + 1 >= bytes.size())
                fail_at(Errc::Truncated, offset, "truncated mutf-8 sequence");
            uint8_t b1 = bytes[offset++];
            uint8_t b2 = bytes[offset++];
            if ((b1 & 0xc0) != 0x80 || (b2 & 0xc0) != 0x80)
                fail_at(Errc::Malformed, offset - 1, "bad mutf-8 continuation byte");
            out.push_back(static_cast<char16_t>(((b0 & 0x0f) << 12) | ((b1 & 0x3f) << 6) |
                                                (b2 & 0x3f)));
            continue;
        }
        // 4-byte UTF-8 never appears in MUTF-8; supplementary characters are
        // encoded as two 3-byte surrogate units.
        fail_at(Errc::Malformed, offset - 1, "invalid mutf-8 lead byte");
    }
}

std::vector<uint8_t> encode_mutf8(const std::u16string& s) {
    std::vector<uint8_t> out;
    out.reserve(s.size());
    for (char16_t u : s) {
        uint16_t c = u;
        if (c != 0 && c < 0x80) {
            out.push_back(static_cast<uint8_t>(c));
        } else if (c < 0x800) {  // includes the 0xC0 0x80 coding of U+0000
            out.push_back(static_cast<uint8_t>(0xc0 | (c >> 6)));
            out.push_back(static_cast<uint8_t>(0x80 | (c & 0x3f)));
        } else {
            out.push_back(static_cast<uint8_t>(0xe0 | (c >> 12)));
            out.push_back(static_cast<uint8_t>(0x80 | ((c >> 6) & 0x3f)));
            out.push_back(static_cast<uint8_t>(0x80 | (c & 0x3f)));
        }
    }
    return out;
}

std::string utf16_to_utf8(const std::u16string& s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        uint32_t cp = s[i];
        if (cp >= 0xd800 && cp <= 0xdbff && i + 1 < s.size() && s[i + 1] >= 0xdc00 &&
            s[i + 1] <= 0xdfff) {
            cp = 0x10000 + ((cp - 0xd800) << 10) + (s[i + 1] - 0xdc00);
            ++i;
        }
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        } else {
            out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
        }
    }
    return out;
}

std::u16string utf8_to_utf16(std::string_view s) {
    std::u16string out;
    out.reserve(s.size());
    size_t i = 0;
    auto bad = [&]() {
        fail_at(Errc::Malformed, i, "invalid utf-8 input");
    };
    while (i < s.size()) {
        uint8_t b0 = static_cast<uint8_t>(s[i]);
        uint32_t cp;
        size_t len;
        if (b0 < 0x80) {
            cp = b0;
            len = 1;
        } else if ((b0 & 0xe0) == 0xc0) {
            cp = b0 & 0x1f;
            len = 2;
        } else if ((b0 & 0xf0) == 0xe0) {
            cp = b0 & 0x0f;
            len = 3;
        } else if ((b0 & 0xf8) == 0xf0) {
            cp = b0 & 0x07;
            len = 4;
        } else {
            bad();
        }
        if (i + len > s.size()) bad();
        for (size_t k = 1; k < len; ++k) {
            uint8_t b = static_cast<uint8_t>(s[i + k]);
            if ((b & 0xc0) != 0x80) bad();
            cp = (cp << 6) | (b & 0x3f);
        }
        i += len;
        if (cp < 0x10000) {
            out.push_back(static_cast<char16_t>(cp));
        } else {
            cp -= 0x10000;
            out.push_back(static_cast<char16_t>(0xd800 + (cp >> 10)));
            out.push_back(static_cast<char16_t>(0xdc00 + (cp & 0x3ff)));
        }
    }
    return out;
}

}  // namespace dexpatch
