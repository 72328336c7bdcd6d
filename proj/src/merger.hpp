#pragma once

#include <cstdint>
#include <vector>

#include "dex_model.hpp"
#include "stubgen.hpp"

namespace dexpatch {

// Old index -> new index, per pool. Every old index is covered; mappings
// are injective and content-preserving (descriptor(old, i) ==
// descriptor(new, map[i])).
struct IndexRemap {
    std::vector<uint32_t> strings;
    std::vector<uint32_t> types;
    std::vector<uint32_t> protos;
    std::vector<uint32_t> fields;
    std::vector<uint32_t> methods;
};

struct MergeResult {
    DexFile dex;
    IndexRemap remap;
    // New-pool method index per StubSpec method, same order.
    std::vector<uint32_t> stub_method_indices;
    uint32_t stub_class_type_idx = 0;
};

// Full pool rebuild: original pools plus everything the stubs require,
// deduplicated and re-sorted; every code item remapped; annotations
// stripped and debug info dropped (both embed pool indices); a new public
// ClassDef for the stub class appended with the stubs as static direct
// methods. Input is never mutated.
MergeResult merge_stub(const DexFile& dex, const StubSpec& stubs);

// Rewrites every pool-indexed instruction operand through the mapping and
// remaps exception-handler type indices; all other code units are
// byte-identical and total length is unchanged. Throws Capacity when a
// remapped index no longer fits its 16-bit operand slot.
CodeItem remap_code_item(const CodeItem& code, const IndexRemap& remap);

}  // namespace dexpatch
