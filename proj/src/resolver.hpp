#pragma once

#include <optional>
#include <vector>

#include "descriptor.hpp"
#include "dex_model.hpp"

namespace dexpatch {

// Read-only signature queries over a parsed DexFile.

struct ClassMethod {
    MethodDescriptor descriptor;
    uint32_t method_idx = 0;
    uint32_t access_flags = 0;
    bool has_code = false;
    bool is_direct = false;
};

// Direct methods then virtual methods of the ClassDef matching
// class_descriptor; empty when the class is absent or has no class_data.
std::vector<ClassMethod> list_class_methods(const DexFile& dex,
                                            std::string_view class_descriptor);

// Binary-search chain over the sorted pools: string -> type -> proto -> method.
std::optional<uint32_t> find_string_index(const DexFile& dex, std::string_view utf8);
std::optional<uint32_t> find_type_index(const DexFile& dex, std::string_view descriptor);
std::optional<uint32_t> find_method_index(const DexFile& dex,
                                          const MethodDescriptor& target);

struct CallTarget {
    MethodDescriptor descriptor;  // the blacklist entry
    uint32_t method_idx = 0;
};

struct CallTargets {
    std::vector<CallTarget> hits;              // entries present in method_ids
    std::vector<MethodDescriptor> inert;       // entries absent from the pool
};

// One hit per blacklist entry present in the method_ids pool. Framework
// methods are normally referenced without being defined, so this looks at
// the pool, never at class_defs.
CallTargets find_call_targets(const DexFile& dex,
                              const std::vector<MethodDescriptor>& entries);

}  // namespace dexpatch
