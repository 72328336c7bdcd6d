#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blacklist.hpp"
#include "dex_model.hpp"
#include "stubgen.hpp"

namespace dexpatch {

struct PatchEntry {
    std::string class_descriptor;      // class containing the call site
    MethodDescriptor containing_method;
    uint32_t code_offset = 0;          // code units into the method's insns
    uint8_t old_opcode = 0;
    uint8_t new_opcode = 0;
    uint32_t old_method_idx = 0;       // pre-merge pool index
    uint32_t new_method_idx = 0;       // stub index in the output pool
    MethodDescriptor target;           // the blacklisted descriptor
};

struct PatchReport {
    std::vector<PatchEntry> entries;
    std::vector<MethodDescriptor> inert_entries;  // blacklisted but never hit
    uint32_t scanned_methods = 0;
    uint32_t scanned_instructions = 0;
    uint32_t patched_sites = 0;
    std::string stub_class_descriptor;  // empty when no stub was added

    std::string to_text() const;
    std::string to_tsv() const;  // one tab-separated record per entry
};

struct PatchOptions {
    std::string stub_class = kDefaultStubClass;
};

struct PatchResult {
    DexFile dex;
    PatchReport report;
    bool changed = false;  // false = zero sites, input returned unchanged
};

// find targets -> scan -> build stubs -> merge -> rewrite -> validate.
// Zero matching call sites returns the input dex unchanged with an
// all-zero report and no stub class.
PatchResult patch_dex(const DexFile& dex, const Blacklist& blacklist,
                      const PatchOptions& options = {});

}  // namespace dexpatch
