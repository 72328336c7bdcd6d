#include "blacklist.hpp"

#include <algorithm>

#include "error.hpp"

namespace dexpatch {

std::vector<MethodDescriptor> Blacklist::descriptors() const {
    std::vector<MethodDescriptor> out;
    out.reserve(entries.size());
    for (const BlacklistEntry& e : entries) out.push_back(e.descriptor);
    return out;
}

Blacklist parse_blacklist(std::string_view text) {
    Blacklist result;
    uint32_t line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        ++line_no;
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        size_t begin = line.find_first_not_of(" \t");
        if (begin == std::string_view::npos) continue;
        size_t end = line.find_last_not_of(" \t");
        std::string_view body = line.substr(begin, end - begin + 1);

        MethodDescriptor descriptor;
        try {
            descriptor = MethodDescriptor::parse(body);
        } catch (const DexError& e) {
            size_t column = begin + (e.offset() ? *e.offset() : 0);
            std::string caret(column, ' ');
            caret += '^';
            fail(Errc::BlacklistSyntax,
                 "line " + std::to_string(line_no) + ": " + e.what() + "\n  " +
                     std::string(line) + "\n  " + caret);
        }

        bool duplicate = std::any_of(
            result.entries.begin(), result.entries.end(),
            [&](const BlacklistEntry& e) { return e.descriptor == descriptor; });
        if (duplicate) {
            result.warnings.push_back("line " + std::to_string(line_no) +
                                      ": duplicate entry " + descriptor.canonical() +
                                      " ignored");
            continue;
        }
        result.entries.push_back({std::move(descriptor), line_no});
    }
    return result;
}

}  // namespace dexpatch
