#include "dex_model.hpp"

#include <algorithm>

#include "error.hpp"
#include "instructions.hpp"
#include "mutf8.hpp"
#include "strutil.hpp"

namespace dexpatch {

std::string DexFile::string_at(uint32_t idx) const {
    return utf16_to_utf8(string_u16_at(idx));
}

const std::u16string& DexFile::string_u16_at(uint32_t idx) const {
    if (idx >= strings.size())
        fail(Errc::DanglingIndex, "string index " + std::to_string(idx) +
                                      " out of range (pool size " +
                                      std::to_string(strings.size()) + ")");
    return strings[idx];
}

std::string resolve_type(const DexFile& dex, uint32_t type_idx) {
    if (type_idx >= dex.type_ids.size())
        fail(Errc::DanglingIndex, "type index " + std::to_string(type_idx) +
                                      " out of range (pool size " +
                                      std::to_string(dex.type_ids.size()) + ")");
    return dex.string_at(dex.type_ids[type_idx].descriptor_idx);
}

MethodDescriptor method_id_to_descriptor(const DexFile& dex, uint32_t method_idx) {
    if (method_idx >= dex.method_ids.size())
        fail(Errc::DanglingIndex, "method index " + std::to_string(method_idx) +
                                      " out of range (pool size " +
                                      std::to_string(dex.method_ids.size()) + ")");
    const MethodId& id = dex.method_ids[method_idx];
    if (id.proto_idx >= dex.proto_ids.size())
        fail(Errc::DanglingIndex, "proto index " + std::to_string(id.proto_idx) +
                                      " out of range (pool size " +
                                      std::to_string(dex.proto_ids.size()) + ")");
    const ProtoId& proto = dex.proto_ids[id.proto_idx];

    MethodDescriptor d;
    d.class_descriptor = resolve_type(dex, id.class_idx);
    d.name = dex.string_at(id.name_idx);
    d.return_descriptor = resolve_type(dex, proto.return_type_idx);
    d.parameter_descriptors.reserve(proto.parameters.size());
    for (uint16_t t : proto.parameters)
        d.parameter_descriptors.push_back(resolve_type(dex, t));
    return d;
}

bool structurally_equal(const DexFile& a, const DexFile& b) {
    return a.strings == b.strings && a.type_ids == b.type_ids &&
           a.proto_ids == b.proto_ids && a.field_ids == b.field_ids &&
           a.method_ids == b.method_ids && a.class_defs == b.class_defs;
}

namespace {

void check(bool ok, const std::string& what) {
    if (!ok) fail(Errc::Validation, what);
}

void check_code_item(const DexFile& dex, const CodeItem& code, const std::string& where) {
    std::vector<DecodedInsn> insns;
    try {
        insns = decode_instructions(code);
    } catch (const DexError& e) {
        fail(Errc::MalformedCode, where + ": " + e.what());
    }
    for (const DecodedInsn& insn : insns) {
        if (insn.is_payload) continue;
        const OpcodeInfo& info = opcode_info(insn.opcode);
        if (info.index == IndexKind::None) continue;
        uint32_t idx = code.insns[insn.offset + 1];
        if (info.wide_index)
            idx |= static_cast<uint32_t>(code.insns[insn.offset + 2]) << 16;
        size_t pool = 0;
        const char* name = "";
        switch (info.index) {
            case IndexKind::String: pool = dex.strings.size(); name = "string"; break;
            case IndexKind::Type: pool = dex.type_ids.size(); name = "type"; break;
            case IndexKind::Field: pool = dex.field_ids.size(); name = "field"; break;
            case IndexKind::Method: pool = dex.method_ids.size(); name = "method"; break;
            case IndexKind::None: break;
        }
        if (idx >= pool)
            fail(Errc::DanglingIndex, where + ": instruction at code unit " +
                                          std::to_string(insn.offset) + " references " +
                                          name + " index " + std::to_string(idx) +
                                          " out of range (" + std::to_string(pool) + ")");
    }
}

}  // namespace

void validate(const DexFile& dex) {
    check(dex.header.magic == kDexMagic035, "header magic is not dex v035");
    check(dex.header.endian_tag == kEndianTag, "endian tag is not 0x12345678");
    check(dex.header.header_size == kHeaderSize, "header size is not 0x70");

    // String pool: unique, ascending by UTF-16 code unit order.
    for (size_t i = 1; i < dex.strings.size(); ++i)
        check(dex.strings[i - 1] < dex.strings[i],
              "string pool not strictly sorted at index " + std::to_string(i));

    // Type pool: in-range descriptor strings, ascending, valid grammar.
    for (size_t i = 0; i < dex.type_ids.size(); ++i) {
        uint32_t s = dex.type_ids[i].descriptor_idx;
        check(s < dex.strings.size(),
              "type " + std::to_string(i) + " has dangling descriptor index");
        check(is_type_descriptor(dex.string_at(s), /*allow_void=*/true),
              "type " + std::to_string(i) + " descriptor '" + dex.string_at(s) +
                  "' is not valid");
        if (i > 0)
            check(dex.type_ids[i - 1].descriptor_idx < s,
                  "type pool not strictly sorted at index " + std::to_string(i));
    }

    // Proto pool: sorted by (return type, parameter list), shorty consistent.
    for (size_t i = 0; i < dex.proto_ids.size(); ++i) {
        const ProtoId& p = dex.proto_ids[i];
        check(p.shorty_idx < dex.strings.size(),
              "proto " + std::to_string(i) + " has dangling shorty index");
        check(p.return_type_idx < dex.type_ids.size(),
              "proto " + std::to_string(i) + " has dangling return type");
        std::vector<std::string> params;
        for (uint16_t t : p.parameters) {
            check(t < dex.type_ids.size(),
                  "proto " + std::to_string(i) + " has dangling parameter type");
            params.push_back(resolve_type(dex, t));
            check(params.back() != "V",
                  "proto " + std::to_string(i) + " has void parameter");
        }
        check(dex.string_at(p.shorty_idx) ==
                  make_shorty(resolve_type(dex, p.return_type_idx), params),
              "proto " + std::to_string(i) + " shorty is inconsistent");
        if (i > 0) {
            const ProtoId& q = dex.proto_ids[i - 1];
            auto key = [](const ProtoId& x) {
                return std::make_pair(x.return_type_idx, x.parameters);
            };
            check(key(q) < key(p),
                  "proto pool not strictly sorted at index " + std::to_string(i));
        }
    }

    // Field pool.
    for (size_t i = 0; i < dex.field_ids.size(); ++i) {
        const FieldId& f = dex.field_ids[i];
        check(f.class_idx < dex.type_ids.size(),
              "field " + std::to_string(i) + " has dangling class index");
        check(f.type_idx < dex.type_ids.size(),
              "field " + std::to_string(i) + " has dangling type index");
        check(f.name_idx < dex.strings.size(),
              "field " + std::to_string(i) + " has dangling name index");
        if (i > 0) {
            const FieldId& g = dex.field_ids[i - 1];
            auto key = [](const FieldId& x) {
                return std::make_tuple(x.class_idx, x.name_idx, x.type_idx);
            };
            check(key(g) < key(f),
                  "field pool not strictly sorted at index " + std::to_string(i));
        }
    }

    // Method pool: sorted by (class, name, proto); 16-bit operand capacity.
    check(dex.method_ids.size() <= kMaxMethodIds,
          "method pool exceeds 65536 entries");
    for (size_t i = 0; i < dex.method_ids.size(); ++i) {
        const MethodId& m = dex.method_ids[i];
        check(m.class_idx < dex.type_ids.size(),
              "method " + std::to_string(i) + " has dangling class index");
        check(m.proto_idx < dex.proto_ids.size(),
              "method " + std::to_string(i) + " has dangling proto index");
        check(m.name_idx < dex.strings.size(),
              "method " + std::to_string(i) + " has dangling name index");
        if (i > 0) {
            const MethodId& n = dex.method_ids[i - 1];
            auto key = [](const MethodId& x) {
                return std::make_tuple(x.class_idx, x.name_idx, x.proto_idx);
            };
            check(key(n) < key(m),
                  "method pool not strictly sorted at index " + std::to_string(i));
        }
    }

    // Class defs: unique class_idx, in-range references, monotone class_data.
    std::vector<uint32_t> seen_classes;
    for (size_t i = 0; i < dex.class_defs.size(); ++i) {
        const ClassDef& c = dex.class_defs[i];
        std::string where = "class_def " + std::to_string(i);
        check(c.class_idx < dex.type_ids.size(), where + " has dangling class index");
        check(c.superclass_idx == kNoIndex || c.superclass_idx < dex.type_ids.size(),
              where + " has dangling superclass index");
        check(c.source_file_idx == kNoIndex || c.source_file_idx < dex.strings.size(),
              where + " has dangling source file index");
        for (uint16_t t : c.interfaces)
            check(t < dex.type_ids.size(), where + " has dangling interface index");
        seen_classes.push_back(c.class_idx);

        if (!c.class_data) continue;
        const ClassData& d = *c.class_data;
        auto check_fields = [&](const std::vector<EncodedField>& fields, const char* kind) {
            uint32_t prev = 0;
            bool first = true;
            for (const EncodedField& f : fields) {
                check(f.field_idx < dex.field_ids.size(),
                      where + " " + kind + " field index out of range");
                check(first || f.field_idx > prev,
                      where + " " + kind + " field indices not strictly increasing");
                prev = f.field_idx;
                first = false;
            }
        };
        check_fields(d.static_fields, "static");
        check_fields(d.instance_fields, "instance");
        auto check_methods = [&](const std::vector<EncodedMethod>& methods,
                                 const char* kind) {
            uint32_t prev = 0;
            bool first = true;
            for (const EncodedMethod& m : methods) {
                check(m.method_idx < dex.method_ids.size(),
                      where + " " + kind + " method index out of range");
                check(first || m.method_idx > prev,
                      where + " " + kind + " method indices not strictly increasing");
                prev = m.method_idx;
                first = false;
                if (m.code)
                    check_code_item(dex, *m.code,
                                    where + " method " + std::to_string(m.method_idx));
            }
        };
        check_methods(d.direct_methods, "direct");
        check_methods(d.virtual_methods, "virtual");
    }
    std::sort(seen_classes.begin(), seen_classes.end());
    check(std::adjacent_find(seen_classes.begin(), seen_classes.end()) ==
              seen_classes.end(),
          "duplicate class_idx across class_defs");
}

}  // namespace dexpatch
