#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "descriptor.hpp"

namespace dexpatch {

// Policy file: one canonical method descriptor per line,
//   Lpkg/Class;->name(ParamDescriptors)ReturnDescriptor
// `#` starts a comment, blank lines are skipped, CRLF tolerated.

struct BlacklistEntry {
    MethodDescriptor descriptor;
    uint32_t line = 0;  // 1-based source line, for diagnostics
};

struct Blacklist {
    std::vector<BlacklistEntry> entries;          // deduplicated, source order
    std::vector<std::string> warnings;            // duplicate-line notes

    std::vector<MethodDescriptor> descriptors() const;
};

// Total over text inputs: returns a Blacklist or throws
// DexError(BlacklistSyntax) whose message carries line number and a caret.
Blacklist parse_blacklist(std::string_view text);

}  // namespace dexpatch
