#include "resolver.hpp"

#include <algorithm>

#include "mutf8.hpp"

namespace dexpatch {

namespace {

// Proto parameter lists compare as type-index sequences; with a sorted type
// pool that equals descriptor order, but lookup only needs equality here.
std::optional<uint32_t> find_proto_index(const DexFile& dex, uint32_t return_type_idx,
                                         const std::vector<uint16_t>& parameters) {
    auto lo = std::lower_bound(
        dex.proto_ids.begin(), dex.proto_ids.end(), return_type_idx,
        [&](const ProtoId& p, uint32_t ret) {
            if (p.return_type_idx != ret) return p.return_type_idx < ret;
            return std::lexicographical_compare(p.parameters.begin(), p.parameters.end(),
                                                parameters.begin(), parameters.end());
        });
    if (lo == dex.proto_ids.end() || lo->return_type_idx != return_type_idx ||
        lo->parameters != parameters)
        return std::nullopt;
    return static_cast<uint32_t>(lo - dex.proto_ids.begin());
}

}  // namespace

std::optional<uint32_t> find_string_index(const DexFile& dex, std::string_view utf8) {
    std::u16string needle = utf8_to_utf16(utf8);
    auto lo = std::lower_bound(dex.strings.begin(), dex.strings.end(), needle);
    if (lo == dex.strings.end() || *lo != needle) return std::nullopt;
    return static_cast<uint32_t>(lo - dex.strings.begin());
}

std::optional<uint32_t> find_type_index(const DexFile& dex,
                                        std::string_view descriptor) {
    auto string_idx = find_string_index(dex, descriptor);
    if (!string_idx) return std::nullopt;
    auto lo = std::lower_bound(dex.type_ids.begin(), dex.type_ids.end(), *string_idx,
                               [](const TypeId& t, uint32_t idx) {
                                   return t.descriptor_idx < idx;
                               });
    if (lo == dex.type_ids.end() || lo->descriptor_idx != *string_idx)
        return std::nullopt;
    return static_cast<uint32_t>(lo - dex.type_ids.begin());
}

std::optional<uint32_t> find_method_index(const DexFile& dex,
                                          const MethodDescriptor& target) {
    auto class_idx = find_type_index(dex, target.class_descriptor);
    if (!class_idx) return std::nullopt;
    auto name_idx = find_string_index(dex, target.name);
    if (!name_idx) return std::nullopt;
    auto return_idx = find_type_index(dex, target.return_descriptor);
    if (!return_idx) return std::nullopt;
    std::vector<uint16_t> params;
    params.reserve(target.parameter_descriptors.size());
    for (const std::string& p : target.parameter_descriptors) {
        auto idx = find_type_index(dex, p);
        if (!idx) return std::nullopt;
        params.push_back(static_cast<uint16_t>(*idx));
    }
    auto proto_idx = find_proto_index(dex, *return_idx, params);
    if (!proto_idx) return std::nullopt;

    auto key = std::make_tuple(static_cast<uint16_t>(*class_idx),
                               *name_idx,
                               static_cast<uint16_t>(*proto_idx));
    auto lo = std::lower_bound(
        dex.method_ids.begin(), dex.method_ids.end(), key,
        [](const MethodId& m, const auto& k) {
            return std::make_tuple(m.class_idx, m.name_idx, m.proto_idx) <
                   std::make_tuple(std::get<0>(k), std::get<1>(k), std::get<2>(k));
        });
    if (lo == dex.method_ids.end() || lo->class_idx != std::get<0>(key) ||
        lo->name_idx != std::get<1>(key) || lo->proto_idx != std::get<2>(key))
        return std::nullopt;
    return static_cast<uint32_t>(lo - dex.method_ids.begin());
}

std::vector<ClassMethod> list_class_methods(const DexFile& dex,
                                            std::string_view class_descriptor) {
    std::vector<ClassMethod> out;
    auto type_idx = find_type_index(dex, class_descriptor);
    if (!type_idx) return out;
    const ClassDef* def = nullptr;
    for (const ClassDef& c : dex.class_defs)
        if (c.class_idx == *type_idx) {
            def = &c;
            break;
        }
    if (!def || !def->class_data) return out;

    auto append = [&](const std::vector<EncodedMethod>& methods, bool direct) {
        for (const EncodedMethod& m : methods) {
            ClassMethod cm;
            cm.descriptor = method_id_to_descriptor(dex, m.method_idx);
            cm.method_idx = m.method_idx;
            cm.access_flags = m.access_flags;
            cm.has_code = m.code.has_value();
            cm.is_direct = direct;
            out.push_back(std::move(cm));
        }
    };
    append(def->class_data->direct_methods, true);
    append(def->class_data->virtual_methods, false);
    return out;
}

CallTargets find_call_targets(const DexFile& dex,
                              const std::vector<MethodDescriptor>& entries) {
    CallTargets result;
    for (const MethodDescriptor& entry : entries) {
        auto idx = find_method_index(dex, entry);
        if (idx)
            result.hits.push_back({entry, *idx});
        else
            result.inert.push_back(entry);
    }
    return result;
}

}  // namespace dexpatch
