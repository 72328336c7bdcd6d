#include "instructions.hpp"

#include "error.hpp"
#include "strutil.hpp"

namespace dexpatch {

namespace {

struct OpcodeTable {
    OpcodeInfo info[256];

    constexpr void set(uint8_t op, uint8_t len, IndexKind idx = IndexKind::None,
                       bool wide = false) {
        info[op] = OpcodeInfo{true, len, idx, wide};
    }

    constexpr void set_range(uint8_t first, uint8_t last, uint8_t len,
                             IndexKind idx = IndexKind::None) {
        for (int op = first; op <= last; ++op)
            info[op] = OpcodeInfo{true, len, idx, false};
    }
};

constexpr OpcodeTable build_table() {
    OpcodeTable t{};

    t.set(0x00, 1);                 // nop (payload forms handled by the decoder)
    t.set(0x01, 1);                 // move
    t.set(0x02, 2);                 // move/from16
    t.set(0x03, 3);                 // move/16
    t.set(0x04, 1);                 // move-wide
    t.set(0x05, 2);                 // move-wide/from16
    t.set(0x06, 3);                 // move-wide/16
    t.set(0x07, 1);                 // move-object
    t.set(0x08, 2);                 // move-object/from16
    t.set(0x09, 3);                 // move-object/16
    t.set_range(0x0a, 0x0d, 1);     // move-result*, move-exception
    t.set(0x0e, 1);                 // return-void
    t.set_range(0x0f, 0x11, 1);     // return, return-wide, return-object
    t.set(0x12, 1);                 // const/4
    t.set(0x13, 2);                 // const/16
    t.set(0x14, 3);                 // const
    t.set(0x15, 2);                 // const/high16
    t.set(0x16, 2);                 // const-wide/16
    t.set(0x17, 3);                 // const-wide/32
    t.set(0x18, 5);                 // const-wide
    t.set(0x19, 2);                 // const-wide/high16
    t.set(0x1a, 2, IndexKind::String);
    t.set(0x1b, 3, IndexKind::String, /*wide=*/true);  // const-string/jumbo
    t.set(0x1c, 2, IndexKind::Type);                   // const-class
    t.set(0x1d, 1);                 // monitor-enter
    t.set(0x1e, 1);                 // monitor-exit
    t.set(0x1f, 2, IndexKind::Type);                   // check-cast
    t.set(0x20, 2, IndexKind::Type);                   // instance-of
    t.set(0x21, 1);                 // array-length
    t.set(0x22, 2, IndexKind::Type);                   // new-instance
    t.set(0x23, 2, IndexKind::Type);                   // new-array
    t.set(0x24, 3, IndexKind::Type);                   // filled-new-array
    t.set(0x25, 3, IndexKind::Type);                   // filled-new-array/range
    t.set(0x26, 3);                 // fill-array-data
    t.set(0x27, 1);                 // throw
    t.set(0x28, 1);                 // goto
    t.set(0x29, 2);                 // goto/16
    t.set(0x2a, 3);                 // goto/32
    t.set(0x2b, 3);                 // packed-switch
    t.set(0x2c, 3);                 // sparse-switch
    t.set_range(0x2d, 0x31, 2);     // cmpkind
    t.set_range(0x32, 0x37, 2);     // if-test
    t.set_range(0x38, 0x3d, 2);     // if-testz
    // 0x3e..0x43 unused
    t.set_range(0x44, 0x51, 2);     // aget/aput family
    t.set_range(0x52, 0x5f, 2, IndexKind::Field);  // iget/iput family
    t.set_range(0x60, 0x6d, 2, IndexKind::Field);  // sget/sput family
    t.set_range(0x6e, 0x72, 3, IndexKind::Method); // invoke-kind
    // 0x73 unused
    t.set_range(0x74, 0x78, 3, IndexKind::Method); // invoke-kind/range
    // 0x79..0x7a unused
    t.set_range(0x7b, 0x8f, 1);     // unop
    t.set_range(0x90, 0xaf, 2);     // binop
    t.set_range(0xb0, 0xcf, 1);     // binop/2addr
    t.set_range(0xd0, 0xd7, 2);     // binop/lit16
    t.set_range(0xd8, 0xe2, 2);     // binop/lit8
    // 0xe3..0xff unused in 035

    return t;
}

constexpr OpcodeTable kTable = build_table();

constexpr uint16_t kPackedSwitchIdent = 0x0100;
constexpr uint16_t kSparseSwitchIdent = 0x0200;
constexpr uint16_t kFillArrayIdent = 0x0300;

// Payload lengths in code units, per the format's own size fields.
uint32_t payload_length(std::span<const uint16_t> insns, uint32_t at) {
    uint16_t ident = insns[at];
    auto need = [&](uint32_t units) {
        if (at + units > insns.size())
            fail_at(Errc::MalformedCode, at, "payload runs past end of code");
    };
    switch (ident) {
        case kPackedSwitchIdent: {
            need(2);
            uint32_t size = insns[at + 1];
            return size * 2 + 4;
        }
        case kSparseSwitchIdent: {
            need(2);
            uint32_t size = insns[at + 1];
            return size * 4 + 2;
        }
        case kFillArrayIdent: {
            need(4);
            uint32_t width = insns[at + 1];
            uint32_t count = static_cast<uint32_t>(insns[at + 2]) |
                             (static_cast<uint32_t>(insns[at + 3]) << 16);
            uint64_t data_units = (static_cast<uint64_t>(width) * count + 1) / 2;
            if (data_units > 0xffffffffu - 4)
                fail_at(Errc::MalformedCode, at, "fill-array payload size overflow");
            return static_cast<uint32_t>(data_units) + 4;
        }
        default:
            return 0;
    }
}

}  // namespace

const OpcodeInfo& opcode_info(uint8_t opcode) {
    return kTable.info[opcode];
}

bool is_invoke_opcode(uint8_t opcode) {
    return (opcode >= kInvokeVirtual && opcode <= kInvokeInterface) ||
           (opcode >= kInvokeVirtualRange && opcode <= kInvokeStaticRange);
}

bool is_invoke_range_opcode(uint8_t opcode) {
    return opcode >= kInvokeVirtualRange && opcode <= kInvokeStaticRange;
}

bool is_invoke_static_kind(uint8_t opcode) {
    return opcode == kInvokeStatic || opcode == kInvokeStaticRange;
}

const char* invoke_mnemonic(uint8_t opcode) {
    switch (opcode) {
        case kInvokeVirtual: return "invoke-virtual";
        case kInvokeSuper: return "invoke-super";
        case kInvokeDirect: return "invoke-direct";
        case kInvokeStatic: return "invoke-static";
        case kInvokeInterface: return "invoke-interface";
        case kInvokeVirtualRange: return "invoke-virtual/range";
        case kInvokeSuperRange: return "invoke-super/range";
        case kInvokeDirectRange: return "invoke-direct/range";
        case kInvokeStaticRange: return "invoke-static/range";
        default: return nullptr;
    }
}

std::vector<DecodedInsn> decode_insns(std::span<const uint16_t> insns) {
    std::vector<DecodedInsn> out;
    uint32_t at = 0;
    while (at < insns.size()) {
        uint16_t unit = insns[at];
        uint8_t opcode = static_cast<uint8_t>(unit & 0xff);

        if (opcode == 0x00 && unit != 0x0000) {
            uint32_t len = payload_length(insns, at);
            if (len == 0)
                fail_at(Errc::MalformedCode, at, "unknown nop-prefixed unit");
            if (at + len > insns.size())
                fail_at(Errc::MalformedCode, at, "payload runs past end of code");
            out.push_back({at, 0x00, len, true});
            at += len;
            continue;
        }

        const OpcodeInfo& info = kTable.info[opcode];
        if (!info.valid)
            fail_at(Errc::MalformedCode, at, "unknown opcode " + hex8(opcode));
        if (at + info.length > insns.size())
            fail_at(Errc::MalformedCode, at, "instruction runs past end of code");
        out.push_back({at, opcode, info.length, false});
        at += info.length;
    }
    return out;
}

std::vector<DecodedInsn> decode_instructions(const CodeItem& code) {
    return decode_insns(code.insns);
}

std::vector<InvokeSite> scan_invokes(const CodeItem& code) {
    std::vector<InvokeSite> sites;
    for (const DecodedInsn& insn : decode_insns(code.insns)) {
        if (insn.is_payload || !is_invoke_opcode(insn.opcode)) continue;
        uint16_t unit0 = code.insns[insn.offset];
        InvokeSite site;
        site.code_offset = insn.offset;
        site.opcode = insn.opcode;
        site.method_idx = code.insns[insn.offset + 1];
        site.is_range = is_invoke_range_opcode(insn.opcode);
        site.arg_count = site.is_range ? static_cast<uint8_t>(unit0 >> 8)
                                       : static_cast<uint8_t>(unit0 >> 12);
        sites.push_back(site);
    }
    return sites;
}

void rewrite_site(CodeItem& code, const InvokeSite& site, uint16_t stub_method_idx) {
    uint16_t unit0 = code.insns[site.code_offset];
    uint8_t new_opcode = site.is_range ? kInvokeStaticRange : kInvokeStatic;
    code.insns[site.code_offset] = static_cast<uint16_t>((unit0 & 0xff00) | new_opcode);
    code.insns[site.code_offset + 1] = stub_method_idx;
}

}  // namespace dexpatch
