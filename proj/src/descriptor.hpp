#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace dexpatch {

// Dex descriptor grammar helpers. Type descriptors are the usual
// `V I J [B Ljava/lang/String;` forms; a method is written canonically as
//   Lpkg/Class;->name(ParamDescriptors)ReturnDescriptor
// with no whitespace.

bool is_type_descriptor(std::string_view s, bool allow_void = false);
bool is_class_descriptor(std::string_view s);  // L...; only
bool is_member_name(std::string_view s);

// true for J and D (occupy a register pair).
bool is_wide_descriptor(std::string_view s);

// Shorty abbreviation: primitives keep their letter, every reference or
// array becomes 'L'. The shorty of a method is return char + param chars.
char shorty_char(std::string_view descriptor);
std::string make_shorty(std::string_view return_descriptor,
                        const std::vector<std::string>& parameter_descriptors);

struct MethodDescriptor {
    std::string class_descriptor;
    std::string name;
    std::vector<std::string> parameter_descriptors;
    std::string return_descriptor;

    std::string canonical() const;

    // Throws DexError(BlacklistSyntax) carrying the failing column in the
    // offset slot.
    static MethodDescriptor parse(std::string_view text);

    bool operator==(const MethodDescriptor&) const = default;
    auto operator<=>(const MethodDescriptor&) const = default;
};

}  // namespace dexpatch
