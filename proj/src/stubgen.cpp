#include "stubgen.hpp"

#include <algorithm>
#include <set>

#include "error.hpp"
#include "instructions.hpp"

namespace dexpatch {

const char* return_strategy_name(ReturnStrategy s) {
    switch (s) {
        case ReturnStrategy::VOID: return "VOID";
        case ReturnStrategy::ZERO_PRIMITIVE: return "ZERO_PRIMITIVE";
        case ReturnStrategy::ZERO_WIDE: return "ZERO_WIDE";
        case ReturnStrategy::NULL_REFERENCE: return "NULL_REFERENCE";
        case ReturnStrategy::CONSTRUCT_DEFAULT: return "CONSTRUCT_DEFAULT";
    }
    return "?";
}

StubPrototype derive_stub_prototype(const MethodDescriptor& origin,
                                    uint8_t invoke_kind) {
    if (!is_invoke_opcode(invoke_kind))
        fail(Errc::Unsupported, "not an invoke-kind opcode");
    StubPrototype proto;
    if (!is_invoke_static_kind(invoke_kind))
        proto.parameter_descriptors.push_back(origin.class_descriptor);
    proto.parameter_descriptors.insert(proto.parameter_descriptors.end(),
                                       origin.parameter_descriptors.begin(),
                                       origin.parameter_descriptors.end());
    proto.return_descriptor = origin.return_descriptor;
    return proto;
}

ReturnStrategy choose_return_strategy(std::string_view return_descriptor) {
    if (return_descriptor == "V") return ReturnStrategy::VOID;
    if (return_descriptor == "J" || return_descriptor == "D")
        return ReturnStrategy::ZERO_WIDE;
    if (return_descriptor.size() == 1) return ReturnStrategy::ZERO_PRIMITIVE;
    if (return_descriptor == "Ljava/lang/String;")
        return ReturnStrategy::CONSTRUCT_DEFAULT;
    return ReturnStrategy::NULL_REFERENCE;
}

uint16_t parameter_register_count(const std::vector<std::string>& parameters) {
    uint16_t regs = 0;
    for (const std::string& p : parameters) regs += is_wide_descriptor(p) ? 2 : 1;
    return regs;
}

CodeItem emit_stub_code(ReturnStrategy strategy, const StubPrototype& proto,
                        const StubCodeRefs& refs) {
    CodeItem code;
    uint16_t params = parameter_register_count(proto.parameter_descriptors);
    code.ins_size = params;
    switch (strategy) {
        case ReturnStrategy::VOID:
            code.registers_size = params;
            code.insns = {0x000e};  // return-void
            break;
        case ReturnStrategy::ZERO_PRIMITIVE:
            code.registers_size = 1 + params;
            code.insns = {0x0012, 0x000f};  // const/4 v0, #0; return v0
            break;
        case ReturnStrategy::ZERO_WIDE:
            code.registers_size = 2 + params;
            code.insns = {0x0016, 0x0000, 0x0010};  // const-wide/16 v0, #0; return-wide v0
            break;
        case ReturnStrategy::NULL_REFERENCE:
            code.registers_size = 1 + params;
            code.insns = {0x0012, 0x0011};  // const/4 v0, #0; return-object v0
            break;
        case ReturnStrategy::CONSTRUCT_DEFAULT:
            code.registers_size = 1 + params;
            code.outs_size = 1;
            // new-instance v0, <type>; invoke-direct {v0}, <init>; return-object v0
            code.insns = {0x0022, refs.return_type_idx,
                          0x1070, refs.init_method_idx, 0x0000,
                          0x0011};
            break;
    }
    return code;
}

namespace {

std::string sanitize_identifier(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                  (c >= '0' && c <= '9');
        out.push_back(ok ? c : '_');
    }
    return out;
}

}  // namespace

StubSpec build_stub_specs(const std::vector<StubHit>& hits,
                          std::string_view stub_class) {
    if (hits.empty()) fail(Errc::Unsupported, "no blacklisted call sites to stub");
    if (!is_class_descriptor(stub_class))
        fail(Errc::Validation,
             "stub class is not a class descriptor: " + std::string(stub_class));

    StubSpec spec;
    spec.stub_class_descriptor = std::string(stub_class);

    // Dedup on (origin, derived prototype): the same target reached via
    // virtual and virtual/range shares one stub.
    std::set<std::pair<MethodDescriptor, StubPrototype>> seen;
    std::set<std::string> names;
    for (const StubHit& hit : hits) {
        for (uint8_t kind : hit.invoke_kinds) {
            StubPrototype proto = derive_stub_prototype(hit.origin, kind);
            if (!seen.emplace(hit.origin, proto).second) continue;
            if (proto.parameter_descriptors.size() > 255)
                fail(Errc::Unsupported,
                     "stub for " + hit.origin.canonical() +
                         " would need more than 255 parameters");

            std::string base = "stub_" + sanitize_identifier(hit.origin.class_descriptor) +
                               "_" + sanitize_identifier(hit.origin.name);
            std::string name = base;
            for (int suffix = 2; !names.insert(name).second; ++suffix)
                name = base + "_" + std::to_string(suffix);

            StubMethod method;
            method.name = std::move(name);
            method.strategy = choose_return_strategy(proto.return_descriptor);
            method.origin = hit.origin;
            method.receiver_prepended = !is_invoke_static_kind(kind);
            method.proto = std::move(proto);
            spec.methods.push_back(std::move(method));
        }
    }
    return spec;
}

}  // namespace dexpatch
