#include "merger.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "encoded.hpp"
#include "error.hpp"
#include "instructions.hpp"
#include "mutf8.hpp"
#include "strutil.hpp"

namespace dexpatch {

namespace {

constexpr const char* kObjectDescriptor = "Ljava/lang/Object;";

uint16_t narrow_index(uint32_t idx, const char* what) {
    if (idx > 0xffff)
        fail(Errc::Capacity, std::string(what) + " index " + std::to_string(idx) +
                                 " does not fit a 16-bit operand");
    return static_cast<uint16_t>(idx);
}

// Pool rebuild state: semantic keys for every entry, old and new, resolved
// to final indices only after sorting.
class PoolBuilder {
public:
    explicit PoolBuilder(const DexFile& dex) : dex_(dex) {}

    void add_string(const std::u16string& s) { string_set_.insert(s); }
    void add_string(std::string_view utf8) { string_set_.insert(utf8_to_utf16(utf8)); }
    void add_type(std::string_view descriptor) {
        add_string(descriptor);
        type_set_.insert(utf8_to_utf16(descriptor));
    }

    void add_proto(const std::string& return_descriptor,
                   const std::vector<std::string>& parameter_descriptors) {
        add_type(return_descriptor);
        for (const std::string& p : parameter_descriptors) add_type(p);
        add_string(make_shorty(return_descriptor, parameter_descriptors));
        new_protos_.insert({return_descriptor, parameter_descriptors});
    }

    void add_method(const std::string& class_descriptor, const std::string& name,
                    const std::string& return_descriptor,
                    const std::vector<std::string>& parameter_descriptors) {
        add_type(class_descriptor);
        add_string(name);
        add_proto(return_descriptor, parameter_descriptors);
        new_methods_.insert(
            {class_descriptor, name, {return_descriptor, parameter_descriptors}});
    }

    void build(DexFile& out, IndexRemap& remap);

    uint32_t string_index(std::string_view utf8) const {
        return string_index(utf8_to_utf16(utf8));
    }
    uint32_t string_index(const std::u16string& s) const {
        auto lo = std::lower_bound(strings_.begin(), strings_.end(), s);
        return static_cast<uint32_t>(lo - strings_.begin());
    }
    uint32_t type_index(std::string_view descriptor) const {
        uint32_t string_idx = string_index(descriptor);
        auto lo = std::lower_bound(
            types_.begin(), types_.end(), string_idx,
            [](const TypeId& t, uint32_t idx) { return t.descriptor_idx < idx; });
        return static_cast<uint32_t>(lo - types_.begin());
    }
    uint32_t proto_index(const std::string& return_descriptor,
                         const std::vector<std::string>& parameters) const {
        auto key = proto_key(return_descriptor, parameters);
        auto lo = std::lower_bound(proto_keys_.begin(), proto_keys_.end(), key);
        return static_cast<uint32_t>(lo - proto_keys_.begin());
    }
    uint32_t method_index(const std::string& class_descriptor, const std::string& name,
                          const std::string& return_descriptor,
                          const std::vector<std::string>& parameters) const {
        auto key = std::make_tuple(
            type_index(class_descriptor), string_index(name),
            proto_index(return_descriptor, parameters));
        auto lo = std::lower_bound(method_keys_.begin(), method_keys_.end(), key);
        return static_cast<uint32_t>(lo - method_keys_.begin());
    }

private:
    using ProtoKey = std::pair<uint32_t, std::vector<uint32_t>>;  // ret, params
    using MethodKey = std::tuple<uint32_t, uint32_t, uint32_t>;   // class, name, proto

    ProtoKey proto_key(const std::string& return_descriptor,
                       const std::vector<std::string>& parameters) const {
        ProtoKey key{type_index(return_descriptor), {}};
        key.second.reserve(parameters.size());
        for (const std::string& p : parameters) key.second.push_back(type_index(p));
        return key;
    }

    const DexFile& dex_;
    std::set<std::u16string> string_set_;
    std::set<std::u16string> type_set_;  // descriptors of added types
    struct NewProto {
        std::string return_descriptor;
        std::vector<std::string> parameters;
        bool operator<(const NewProto& o) const {
            return std::tie(return_descriptor, parameters) <
                   std::tie(o.return_descriptor, o.parameters);
        }
    };
    struct NewMethod {
        std::string class_descriptor;
        std::string name;
        NewProto proto;
        bool operator<(const NewMethod& o) const {
            return std::tie(class_descriptor, name, proto) <
                   std::tie(o.class_descriptor, o.name, o.proto);
        }
    };
    std::set<NewProto> new_protos_;
    std::set<NewMethod> new_methods_;

    std::vector<std::u16string> strings_;
    std::vector<TypeId> types_;
    std::vector<ProtoKey> proto_keys_;
    std::vector<MethodKey> method_keys_;
};

void PoolBuilder::build(DexFile& out, IndexRemap& remap) {
    // Strings: union of old pool and additions, sorted by UTF-16 units.
    for (const std::u16string& s : dex_.strings) string_set_.insert(s);
    strings_.assign(string_set_.begin(), string_set_.end());
    remap.strings.resize(dex_.strings.size());
    for (size_t i = 0; i < dex_.strings.size(); ++i)
        remap.strings[i] = string_index(dex_.strings[i]);

    // Types: sorted by descriptor string index; string order equals
    // descriptor order, so dedup on the descriptor itself.
    for (const TypeId& t : dex_.type_ids) type_set_.insert(dex_.strings[t.descriptor_idx]);
    types_.clear();
    for (const std::u16string& d : type_set_) types_.push_back({string_index(d)});
    std::sort(types_.begin(), types_.end(),
              [](const TypeId& a, const TypeId& b) {
                  return a.descriptor_idx < b.descriptor_idx;
              });
    remap.types.resize(dex_.type_ids.size());
    for (size_t i = 0; i < dex_.type_ids.size(); ++i) {
        const std::u16string& d = dex_.strings[dex_.type_ids[i].descriptor_idx];
        remap.types[i] = type_index(utf16_to_utf8(d));
    }

    // Protos: keys over new type indices; sort order (return, params lex)
    // is exactly the key's natural order.
    std::set<ProtoKey> proto_set;
    for (const ProtoId& p : dex_.proto_ids) {
        ProtoKey key{remap.types[p.return_type_idx], {}};
        key.second.reserve(p.parameters.size());
        for (uint16_t t : p.parameters) key.second.push_back(remap.types[t]);
        proto_set.insert(std::move(key));
    }
    for (const NewProto& p : new_protos_)
        proto_set.insert(proto_key(p.return_descriptor, p.parameters));
    proto_keys_.assign(proto_set.begin(), proto_set.end());
    remap.protos.resize(dex_.proto_ids.size());
    for (size_t i = 0; i < dex_.proto_ids.size(); ++i) {
        const ProtoId& p = dex_.proto_ids[i];
        ProtoKey key{remap.types[p.return_type_idx], {}};
        for (uint16_t t : p.parameters) key.second.push_back(remap.types[t]);
        auto lo = std::lower_bound(proto_keys_.begin(), proto_keys_.end(), key);
        remap.protos[i] = static_cast<uint32_t>(lo - proto_keys_.begin());
    }

    // Fields: no additions, but indices shift with the pools.
    std::set<std::tuple<uint32_t, uint32_t, uint32_t>> field_set;  // class,name,type
    for (const FieldId& f : dex_.field_ids)
        field_set.insert({remap.types[f.class_idx], remap.strings[f.name_idx],
                          remap.types[f.type_idx]});
    std::vector<std::tuple<uint32_t, uint32_t, uint32_t>> field_keys(
        field_set.begin(), field_set.end());
    remap.fields.resize(dex_.field_ids.size());
    for (size_t i = 0; i < dex_.field_ids.size(); ++i) {
        const FieldId& f = dex_.field_ids[i];
        std::tuple<uint32_t, uint32_t, uint32_t> key{remap.types[f.class_idx],
                                                     remap.strings[f.name_idx],
                                                     remap.types[f.type_idx]};
        auto lo = std::lower_bound(field_keys.begin(), field_keys.end(), key);
        remap.fields[i] = static_cast<uint32_t>(lo - field_keys.begin());
    }

    // Methods.
    std::set<MethodKey> method_set;
    for (const MethodId& m : dex_.method_ids)
        method_set.insert({remap.types[m.class_idx], remap.strings[m.name_idx],
                           remap.protos[m.proto_idx]});
    for (const NewMethod& m : new_methods_)
        method_set.insert({type_index(m.class_descriptor), string_index(m.name),
                           proto_index(m.proto.return_descriptor, m.proto.parameters)});
    if (method_set.size() > kMaxMethodIds)
        fail(Errc::Capacity, "merged method pool would hold " +
                                 std::to_string(method_set.size()) +
                                 " entries (limit 65536)");
    method_keys_.assign(method_set.begin(), method_set.end());
    remap.methods.resize(dex_.method_ids.size());
    for (size_t i = 0; i < dex_.method_ids.size(); ++i) {
        const MethodId& m = dex_.method_ids[i];
        MethodKey key{remap.types[m.class_idx], remap.strings[m.name_idx],
                      remap.protos[m.proto_idx]};
        auto lo = std::lower_bound(method_keys_.begin(), method_keys_.end(), key);
        remap.methods[i] = static_cast<uint32_t>(lo - method_keys_.begin());
    }

    // Materialize the pools.
    out.strings = strings_;
    out.type_ids = types_;
    out.proto_ids.clear();
    for (const ProtoKey& key : proto_keys_) {
        ProtoId p;
        p.return_type_idx = key.first;
        p.parameters.reserve(key.second.size());
        for (uint32_t t : key.second)
            p.parameters.push_back(narrow_index(t, "proto parameter type"));

        std::string ret = utf16_to_utf8(strings_[types_[key.first].descriptor_idx]);
        std::vector<std::string> params;
        for (uint32_t t : key.second)
            params.push_back(utf16_to_utf8(strings_[types_[t].descriptor_idx]));
        p.shorty_idx = string_index(make_shorty(ret, params));
        out.proto_ids.push_back(std::move(p));
    }
    out.field_ids.clear();
    for (const auto& [cls, name, type] : field_keys)
        out.field_ids.push_back({narrow_index(cls, "field class type"),
                                 narrow_index(type, "field type"), name});
    out.method_ids.clear();
    for (const auto& [cls, name, proto] : method_keys_)
        out.method_ids.push_back({narrow_index(cls, "method class type"),
                                  narrow_index(proto, "method proto"), name});
}

std::vector<uint8_t> remap_tries(const std::vector<uint8_t>& blob, uint16_t tries_size,
                                 const IndexRemap& remap) {
    TryBlob decoded = decode_tries(blob, tries_size);
    for (CatchHandler& handler : decoded.handlers)
        for (auto& [type_idx, addr] : handler.type_addr_pairs) {
            if (type_idx >= remap.types.size())
                fail(Errc::DanglingIndex, "exception handler names type index " +
                                              std::to_string(type_idx) +
                                              " outside the pool");
            type_idx = remap.types[type_idx];
        }
    return encode_tries(decoded);
}

}  // namespace

CodeItem remap_code_item(const CodeItem& code, const IndexRemap& remap) {
    CodeItem out = code;
    for (const DecodedInsn& insn : decode_instructions(code)) {
        if (insn.is_payload) continue;
        const OpcodeInfo& info = opcode_info(insn.opcode);
        if (info.index == IndexKind::None) continue;
        const std::vector<uint32_t>* mapping = nullptr;
        const char* what = "";
        switch (info.index) {
            case IndexKind::String: mapping = &remap.strings; what = "string"; break;
            case IndexKind::Type: mapping = &remap.types; what = "type"; break;
            case IndexKind::Field: mapping = &remap.fields; what = "field"; break;
            case IndexKind::Method: mapping = &remap.methods; what = "method"; break;
            case IndexKind::None: break;
        }
        uint32_t old_idx = info.wide_index
                               ? (static_cast<uint32_t>(code.insns[insn.offset + 2]) << 16 |
                                  code.insns[insn.offset + 1])
                               : code.insns[insn.offset + 1];
        if (old_idx >= mapping->size())
            fail(Errc::DanglingIndex, std::string(what) + " index " +
                                          std::to_string(old_idx) +
                                          " out of range in code");
        uint32_t new_idx = (*mapping)[old_idx];
        if (info.wide_index) {
            out.insns[insn.offset + 1] = static_cast<uint16_t>(new_idx);
            out.insns[insn.offset + 2] = static_cast<uint16_t>(new_idx >> 16);
        } else {
            out.insns[insn.offset + 1] = narrow_index(new_idx, what);
        }
    }
    if (code.tries_size > 0)
        out.tries_and_handlers = remap_tries(code.tries_and_handlers, code.tries_size, remap);
    return out;
}

MergeResult merge_stub(const DexFile& dex, const StubSpec& stubs) {
    if (stubs.methods.empty())
        fail(Errc::Validation, "stub spec has no methods");
    for (const ClassDef& c : dex.class_defs)
        if (resolve_type(dex, c.class_idx) == stubs.stub_class_descriptor)
            fail(Errc::NameCollision, "class " + stubs.stub_class_descriptor +
                                          " is already defined in the input dex");
    std::set<std::string> names;
    for (const StubMethod& m : stubs.methods)
        if (!names.insert(m.name).second)
            fail(Errc::NameCollision, "duplicate stub name " + m.name);

    PoolBuilder pools(dex);
    pools.add_type(stubs.stub_class_descriptor);
    pools.add_type(kObjectDescriptor);
    for (const StubMethod& m : stubs.methods) {
        pools.add_method(stubs.stub_class_descriptor, m.name,
                         m.proto.return_descriptor, m.proto.parameter_descriptors);
        if (m.strategy == ReturnStrategy::CONSTRUCT_DEFAULT)
            pools.add_method(m.proto.return_descriptor, "<init>", "V", {});
    }

    MergeResult result;
    IndexRemap& remap = result.remap;
    pools.build(result.dex, remap);

    // Rebuild class defs through the remap; annotations and debug info are
    // dropped (both embed old pool indices), static_values pass through
    // only when they carry no pool references.
    for (const ClassDef& c : dex.class_defs) {
        ClassDef out;
        out.class_idx = remap.types[c.class_idx];
        out.access_flags = c.access_flags;
        out.superclass_idx =
            c.superclass_idx == kNoIndex ? kNoIndex : remap.types[c.superclass_idx];
        for (uint16_t t : c.interfaces)
            out.interfaces.push_back(narrow_index(remap.types[t], "interface type"));
        out.source_file_idx =
            c.source_file_idx == kNoIndex ? kNoIndex : remap.strings[c.source_file_idx];
        if (!c.static_values.empty()) {
            if (encoded_array_has_pool_refs(c.static_values))
                fail(Errc::Unsupported,
                     "class " + resolve_type(dex, c.class_idx) +
                         " has static values with pool references; remapping "
                         "them is not supported");
            out.static_values = c.static_values;
        }
        if (c.class_data) {
            ClassData data;
            for (const EncodedField& f : c.class_data->static_fields)
                data.static_fields.push_back({remap.fields[f.field_idx], f.access_flags});
            for (const EncodedField& f : c.class_data->instance_fields)
                data.instance_fields.push_back({remap.fields[f.field_idx], f.access_flags});
            auto remap_methods = [&](const std::vector<EncodedMethod>& in,
                                     std::vector<EncodedMethod>& out_list) {
                for (const EncodedMethod& m : in) {
                    EncodedMethod nm;
                    nm.method_idx = remap.methods[m.method_idx];
                    nm.access_flags = m.access_flags;
                    if (m.code) {
                        nm.code = remap_code_item(*m.code, remap);
                        nm.code->debug_info.clear();
                    }
                    out_list.push_back(std::move(nm));
                }
            };
            remap_methods(c.class_data->direct_methods, data.direct_methods);
            remap_methods(c.class_data->virtual_methods, data.virtual_methods);
            auto by_field = [](const EncodedField& a, const EncodedField& b) {
                return a.field_idx < b.field_idx;
            };
            auto by_method = [](const EncodedMethod& a, const EncodedMethod& b) {
                return a.method_idx < b.method_idx;
            };
            std::sort(data.static_fields.begin(), data.static_fields.end(), by_field);
            std::sort(data.instance_fields.begin(), data.instance_fields.end(), by_field);
            std::sort(data.direct_methods.begin(), data.direct_methods.end(), by_method);
            std::sort(data.virtual_methods.begin(), data.virtual_methods.end(), by_method);
            out.class_data = std::move(data);
        }
        result.dex.class_defs.push_back(std::move(out));
    }

    // Stub class definition, appended last.
    result.stub_class_type_idx = pools.type_index(stubs.stub_class_descriptor);
    ClassDef stub_def;
    stub_def.class_idx = result.stub_class_type_idx;
    stub_def.access_flags = kAccPublic;
    stub_def.superclass_idx = pools.type_index(kObjectDescriptor);
    ClassData stub_data;
    result.stub_method_indices.resize(stubs.methods.size());
    std::vector<std::pair<uint32_t, size_t>> order;  // (method idx, spec position)
    for (size_t i = 0; i < stubs.methods.size(); ++i) {
        const StubMethod& m = stubs.methods[i];
        uint32_t idx = pools.method_index(stubs.stub_class_descriptor, m.name,
                                          m.proto.return_descriptor,
                                          m.proto.parameter_descriptors);
        result.stub_method_indices[i] = idx;
        order.emplace_back(idx, i);
    }
    std::sort(order.begin(), order.end());
    for (const auto& [idx, i] : order) {
        const StubMethod& m = stubs.methods[i];
        StubCodeRefs refs;
        if (m.strategy == ReturnStrategy::CONSTRUCT_DEFAULT) {
            refs.return_type_idx = narrow_index(
                pools.type_index(m.proto.return_descriptor), "stub return type");
            refs.init_method_idx = narrow_index(
                pools.method_index(m.proto.return_descriptor, "<init>", "V", {}),
                "stub constructor");
        }
        EncodedMethod em;
        em.method_idx = idx;
        em.access_flags = kAccPublic | kAccStatic;
        em.code = emit_stub_code(m.strategy, m.proto, refs);
        stub_data.direct_methods.push_back(std::move(em));
    }
    stub_def.class_data = std::move(stub_data);
    result.dex.class_defs.push_back(std::move(stub_def));

    validate(result.dex);
    return result;
}

}  // namespace dexpatch
