#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dex_model.hpp"

namespace dexpatch {

// Dalvik instruction stream decoding for dex 035. Lengths come from the
// published per-opcode format table; payload pseudo-instructions
// (0x0100/0x0200/0x0300) carry their own size and are treated as data.

enum class IndexKind : uint8_t { None, String, Type, Field, Method };

struct OpcodeInfo {
    bool valid = false;
    uint8_t length = 0;  // code units; 0 for the payload forms (computed)
    IndexKind index = IndexKind::None;
    bool wide_index = false;  // 32-bit index (const-string/jumbo)
};

const OpcodeInfo& opcode_info(uint8_t opcode);

// The patchable invoke family: the scan/rewrite surface of the patcher.
inline constexpr uint8_t kInvokeVirtual = 0x6e;
inline constexpr uint8_t kInvokeSuper = 0x6f;
inline constexpr uint8_t kInvokeDirect = 0x70;
inline constexpr uint8_t kInvokeStatic = 0x71;
inline constexpr uint8_t kInvokeInterface = 0x72;
inline constexpr uint8_t kInvokeVirtualRange = 0x74;
inline constexpr uint8_t kInvokeSuperRange = 0x75;
inline constexpr uint8_t kInvokeDirectRange = 0x76;
inline constexpr uint8_t kInvokeStaticRange = 0x77;

bool is_invoke_opcode(uint8_t opcode);
bool is_invoke_range_opcode(uint8_t opcode);
bool is_invoke_static_kind(uint8_t opcode);  // 0x71 or 0x77
const char* invoke_mnemonic(uint8_t opcode); // nullptr if not one of the nine

struct DecodedInsn {
    uint32_t offset = 0;  // code units from the start of insns
    uint8_t opcode = 0;   // 0x00 for payload data
    uint32_t length = 0;  // code units
    bool is_payload = false;
};

struct InvokeSite {
    uint32_t code_offset = 0;
    uint8_t opcode = 0;
    uint16_t method_idx = 0;
    bool is_range = false;
    uint8_t arg_count = 0;  // A nibble (non-range) or AA byte (range)
};

// Linear decode covering exactly insns.size() code units; throws
// DexError(MalformedCode) with the code-unit offset on unknown opcodes or
// overruns.
std::vector<DecodedInsn> decode_instructions(const CodeItem& code);
std::vector<DecodedInsn> decode_insns(std::span<const uint16_t> insns);

// All and only Table-3.1 invoke instructions, in stream order. Every site
// spans exactly 3 code units.
std::vector<InvokeSite> scan_invokes(const CodeItem& code);

// In-place size-preserving rewrite: opcode byte becomes invoke-static (or
// /range), the method-index halfword becomes stub_method_idx, every other
// byte of the instruction is left untouched.
void rewrite_site(CodeItem& code, const InvokeSite& site, uint16_t stub_method_idx);

}  // namespace dexpatch
