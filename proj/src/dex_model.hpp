#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "descriptor.hpp"

namespace dexpatch {

// In-memory model of one dex file (version 035). Index chains follow the
// file format: instructions name methods by 16-bit method_ids index, a
// method id names its class/proto/name by index, and so on down to the
// string pool. A DexFile is immutable after construction; mutation means
// building a new one.

inline constexpr uint32_t kNoIndex = 0xffffffff;
inline constexpr std::array<uint8_t, 8> kDexMagic035 = {'d', 'e', 'x', '\n',
                                                        '0', '3', '5', '\0'};
inline constexpr uint32_t kEndianTag = 0x12345678;
inline constexpr uint32_t kHeaderSize = 0x70;
inline constexpr uint32_t kMaxMethodIds = 65536;

enum AccessFlags : uint32_t {
    kAccPublic = 0x0001,
    kAccPrivate = 0x0002,
    kAccProtected = 0x0004,
    kAccStatic = 0x0008,
    kAccFinal = 0x0010,
    kAccNative = 0x0100,
    kAccAbstract = 0x0400,
    kAccConstructor = 0x10000,
};

struct DexHeader {
    std::array<uint8_t, 8> magic = kDexMagic035;
    uint32_t checksum = 0;
    std::array<uint8_t, 20> signature{};
    uint32_t file_size = 0;
    uint32_t header_size = kHeaderSize;
    uint32_t endian_tag = kEndianTag;
    uint32_t link_size = 0;
    uint32_t link_off = 0;
    uint32_t map_off = 0;
    uint32_t string_ids_size = 0, string_ids_off = 0;
    uint32_t type_ids_size = 0, type_ids_off = 0;
    uint32_t proto_ids_size = 0, proto_ids_off = 0;
    uint32_t field_ids_size = 0, field_ids_off = 0;
    uint32_t method_ids_size = 0, method_ids_off = 0;
    uint32_t class_defs_size = 0, class_defs_off = 0;
    uint32_t data_size = 0, data_off = 0;
};

struct TypeId {
    uint32_t descriptor_idx = 0;
    bool operator==(const TypeId&) const = default;
};

struct ProtoId {
    uint32_t shorty_idx = 0;
    uint32_t return_type_idx = 0;
    std::vector<uint16_t> parameters;
    bool operator==(const ProtoId&) const = default;
};

struct FieldId {
    uint16_t class_idx = 0;
    uint16_t type_idx = 0;
    uint32_t name_idx = 0;
    bool operator==(const FieldId&) const = default;
};

struct MethodId {
    uint16_t class_idx = 0;
    uint16_t proto_idx = 0;
    uint32_t name_idx = 0;
    bool operator==(const MethodId&) const = default;
};

struct CodeItem {
    uint16_t registers_size = 0;
    uint16_t ins_size = 0;
    uint16_t outs_size = 0;
    uint16_t tries_size = 0;
    std::vector<uint16_t> insns;
    // tries + encoded_catch_handler_list, verbatim. Internal handler offsets
    // are relative to the blob start, so it relocates as-is; the merger
    // rewrites the type indices it embeds (see merger.cpp).
    std::vector<uint8_t> tries_and_handlers;
    // debug_info_item bytes, verbatim; empty = absent. Dropped on merge
    // because debug state machines embed string/type indices.
    std::vector<uint8_t> debug_info;

    bool operator==(const CodeItem&) const = default;
};

struct EncodedField {
    uint32_t field_idx = 0;  // absolute; deltas are a wire-format detail
    uint32_t access_flags = 0;
    bool operator==(const EncodedField&) const = default;
};

struct EncodedMethod {
    uint32_t method_idx = 0;  // absolute
    uint32_t access_flags = 0;
    std::optional<CodeItem> code;
    bool operator==(const EncodedMethod&) const = default;
};

struct ClassData {
    std::vector<EncodedField> static_fields;
    std::vector<EncodedField> instance_fields;
    std::vector<EncodedMethod> direct_methods;
    std::vector<EncodedMethod> virtual_methods;
    bool operator==(const ClassData&) const = default;
};

// Annotation payloads are opaque encoded_annotation bytes; only the
// offset-bearing directory/set skeleton is modeled so the writer can
// relocate it (directories embed absolute file offsets).
struct AnnotationSet {
    std::vector<std::vector<uint8_t>> items;  // each: visibility + encoded_annotation
    bool operator==(const AnnotationSet&) const = default;
};

struct AnnotationsDirectory {
    std::optional<AnnotationSet> class_annotations;
    std::vector<std::pair<uint32_t, AnnotationSet>> field_annotations;   // field_idx
    std::vector<std::pair<uint32_t, AnnotationSet>> method_annotations;  // method_idx
    // parameter list per method; absent entry = 0 offset in the ref list
    std::vector<std::pair<uint32_t, std::vector<std::optional<AnnotationSet>>>>
        parameter_annotations;
    bool operator==(const AnnotationsDirectory&) const = default;
};

struct ClassDef {
    uint32_t class_idx = 0;
    uint32_t access_flags = 0;
    uint32_t superclass_idx = kNoIndex;
    std::vector<uint16_t> interfaces;
    uint32_t source_file_idx = kNoIndex;
    std::optional<ClassData> class_data;
    std::vector<uint8_t> static_values;  // encoded_array_item bytes; empty = absent
    std::optional<AnnotationsDirectory> annotations;
    bool operator==(const ClassDef&) const = default;
};

struct MapItem {
    uint16_t type = 0;
    uint32_t size = 0;
    uint32_t offset = 0;
    bool operator==(const MapItem&) const = default;
};

struct DexFile {
    DexHeader header;  // as parsed; the writer recomputes every field
    std::vector<std::u16string> strings;
    std::vector<TypeId> type_ids;
    std::vector<ProtoId> proto_ids;
    std::vector<FieldId> field_ids;
    std::vector<MethodId> method_ids;
    std::vector<ClassDef> class_defs;
    std::vector<MapItem> map_list;  // as parsed; regenerated on write

    std::string string_at(uint32_t idx) const;             // utf-8 view of pool entry
    const std::u16string& string_u16_at(uint32_t idx) const;
};

// Structural equality: pools and class contents. Header layout fields and
// the map list are producer-dependent and excluded.
bool structurally_equal(const DexFile& a, const DexFile& b);

// ---- dex_model operations ----

// type_idx -> descriptor string, via the type->string indirection.
std::string resolve_type(const DexFile& dex, uint32_t type_idx);

// Walks MethodId -> class/name/proto -> strings.
MethodDescriptor method_id_to_descriptor(const DexFile& dex, uint32_t method_idx);

// Asserts every model invariant: magic/header constants, pool sort orders,
// uniqueness, index ranges (including instruction operands), shorty
// consistency, class_data monotonicity, method pool capacity. Throws
// DexError(Validation / DanglingIndex / MalformedCode) on violation.
void validate(const DexFile& dex);

}  // namespace dexpatch
