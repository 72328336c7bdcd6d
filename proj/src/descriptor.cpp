#include "descriptor.hpp"

#include "error.hpp"

namespace dexpatch {

namespace {

// Consumes one type descriptor starting at pos, returns one-past-the-end,
// or npos if the text does not start with a valid descriptor.
size_t scan_type_descriptor(std::string_view s, size_t pos, bool allow_void) {
    size_t dims = 0;
    while (pos < s.size() && s[pos] == '[') {
        ++pos;
        if (++dims > 255) return std::string_view::npos;
    }
    if (pos >= s.size()) return std::string_view::npos;
    char c = s[pos];
    switch (c) {
        case 'Z': case 'B': case 'S': case 'C': case 'I': case 'J': case 'F': case 'D':
            return pos + 1;
        case 'V':
            // void is only legal as a bare return type, never as array element.
            return (allow_void && dims == 0) ? pos + 1 : std::string_view::npos;
        case 'L': {
            size_t semi = s.find(';', pos);
            if (semi == std::string_view::npos) return std::string_view::npos;
            // Non-empty, slash-separated segments with no empty segment.
            if (semi == pos + 1) return std::string_view::npos;
            char prev = 'L';
            for (size_t i = pos + 1; i < semi; ++i) {
                char k = s[i];
                if (k == '/' && (prev == '/' || prev == 'L')) return std::string_view::npos;
                if (k == ';' || k == '[' || k == '(' || k == ')') return std::string_view::npos;
                prev = k;
            }
            if (prev == '/') return std::string_view::npos;
            return semi + 1;
        }
        default:
            return std::string_view::npos;
    }
}

}  // namespace

bool is_type_descriptor(std::string_view s, bool allow_void) {
    return scan_type_descriptor(s, 0, allow_void) == s.size() && !s.empty();
}

bool is_class_descriptor(std::string_view s) {
    return !s.empty() && s.front() == 'L' && is_type_descriptor(s);
}

bool is_member_name(std::string_view s) {
    if (s.empty()) return false;
    if (s == "<init>" || s == "<clinit>") return true;
    for (char c : s) {
        if (c == '(' || c == ')' || c == ';' || c == '[' || c == '/' || c == '<' ||
            c == '>' || c == ' ' || c == '\t')
            return false;
    }
    return true;
}

bool is_wide_descriptor(std::string_view s) {
    return s == "J" || s == "D";
}

char shorty_char(std::string_view descriptor) {
    if (descriptor.size() == 1) return descriptor[0];
    return 'L';
}

std::string make_shorty(std::string_view return_descriptor,
                        const std::vector<std::string>& parameter_descriptors) {
    std::string shorty;
    shorty.reserve(parameter_descriptors.size() + 1);
    shorty.push_back(shorty_char(return_descriptor));
    for (const auto& p : parameter_descriptors) shorty.push_back(shorty_char(p));
    return shorty;
}

std::string MethodDescriptor::canonical() const {
    std::string out = class_descriptor;
    out += "->";
    out += name;
    out += '(';
    for (const auto& p : parameter_descriptors) out += p;
    out += ')';
    out += return_descriptor;
    return out;
}

MethodDescriptor MethodDescriptor::parse(std::string_view text) {
    auto bad = [&](size_t col, const char* what) -> void {
        throw DexError(Errc::BlacklistSyntax, std::string(what), col);
    };

    size_t arrow = text.find("->");
    if (arrow == std::string_view::npos) bad(0, "missing '->' separator");

    MethodDescriptor d;
    d.class_descriptor = std::string(text.substr(0, arrow));
    if (!is_class_descriptor(d.class_descriptor))
        bad(0, "invalid class descriptor");

    size_t lparen = text.find('(', arrow + 2);
    if (lparen == std::string_view::npos) bad(arrow + 2, "missing '('");
    d.name = std::string(text.substr(arrow + 2, lparen - arrow - 2));
    if (!is_member_name(d.name)) bad(arrow + 2, "invalid method name");

    size_t rparen = text.find(')', lparen);
    if (rparen == std::string_view::npos) bad(lparen, "missing ')'");

    size_t pos = lparen + 1;
    while (pos < rparen) {
        size_t end = scan_type_descriptor(text.substr(0, rparen), pos, false);
        if (end == std::string_view::npos) bad(pos, "invalid parameter descriptor");
        d.parameter_descriptors.emplace_back(text.substr(pos, end - pos));
        pos = end;
    }

    d.return_descriptor = std::string(text.substr(rparen + 1));
    if (!is_type_descriptor(d.return_descriptor, /*allow_void=*/true))
        bad(rparen + 1, "invalid return descriptor");
    return d;
}

}  // namespace dexpatch
