#include "dex_io.hpp"

#include <algorithm>
#include <map>

#include "bytes.hpp"
#include "checksums.hpp"
#include "encoded.hpp"
#include "error.hpp"
#include "mutf8.hpp"
#include "strutil.hpp"

namespace dexpatch {

namespace {

// map_list item type codes.
enum MapType : uint16_t {
    kMapHeader = 0x0000,
    kMapStringId = 0x0001,
    kMapTypeId = 0x0002,
    kMapProtoId = 0x0003,
    kMapFieldId = 0x0004,
    kMapMethodId = 0x0005,
    kMapClassDef = 0x0006,
    kMapMapList = 0x1000,
    kMapTypeList = 0x1001,
    kMapAnnotationSetRefList = 0x1002,
    kMapAnnotationSet = 0x1003,
    kMapClassData = 0x2000,
    kMapCode = 0x2001,
    kMapStringData = 0x2002,
    kMapDebugInfo = 0x2003,
    kMapAnnotation = 0x2004,
    kMapEncodedArray = 0x2005,
    kMapAnnotationsDirectory = 0x2006,
};

// ---------------------------------------------------------------- parsing

class Parser {
public:
    explicit Parser(std::span<const uint8_t> bytes) : bytes_(bytes) {}

    DexFile run(const ParseOptions& options, ParseInfo* info) {
        parse_header(options, info);
        parse_strings();
        parse_type_ids();
        parse_proto_ids();
        parse_field_ids();
        parse_method_ids();
        parse_class_defs();
        parse_map_list();
        validate(dex_);
        return std::move(dex_);
    }

private:
    std::span<const uint8_t> bytes_;
    DexFile dex_;

    uint32_t u32_at(size_t off) const { return load_u32(bytes_.data() + off); }
    uint16_t u16_at(size_t off) const { return load_u16(bytes_.data() + off); }

    void bound_check(size_t off, size_t need, const char* what) const {
        if (off > bytes_.size() || need > bytes_.size() - off)
            fail_at(Errc::Truncated,
                    off, std::string(what) + " extends past end of file");
    }

    void section_check(uint32_t off, uint32_t count, size_t item_size,
                       const char* what) const {
        if (count == 0) return;
        if (off < kHeaderSize)
            fail_at(Errc::BadHeader, off, std::string(what) + " offset inside header");
        bound_check(off, static_cast<size_t>(count) * item_size, what);
    }

    void parse_header(const ParseOptions& options, ParseInfo* info) {
        if (bytes_.size() < kHeaderSize)
            fail_at(Errc::Truncated, bytes_.size(),
                    "file shorter than the 0x70-byte header");

        DexHeader& h = dex_.header;
        std::copy_n(bytes_.begin(), 8, h.magic.begin());
        if (!std::equal(h.magic.begin(), h.magic.begin() + 4, kDexMagic035.begin()))
            fail_at(Errc::BadMagic, 0, "not a dex file (bad magic)");
        if (h.magic != kDexMagic035) {
            std::string version(reinterpret_cast<const char*>(h.magic.data()) + 4, 3);
            if (version == "036" || version == "037" || version == "038" ||
                version == "039")
                fail_at(Errc::UnsupportedVersion, 4,
                        "dex version " + version + " not supported (only 035)");
            fail_at(Errc::BadMagic, 4, "bad dex version bytes");
        }

        h.checksum = u32_at(0x08);
        std::copy_n(bytes_.begin() + 0x0c, 20, h.signature.begin());
        h.file_size = u32_at(0x20);
        h.header_size = u32_at(0x24);
        h.endian_tag = u32_at(0x28);
        h.link_size = u32_at(0x2c);
        h.link_off = u32_at(0x30);
        h.map_off = u32_at(0x34);
        h.string_ids_size = u32_at(0x38);
        h.string_ids_off = u32_at(0x3c);
        h.type_ids_size = u32_at(0x40);
        h.type_ids_off = u32_at(0x44);
        h.proto_ids_size = u32_at(0x48);
        h.proto_ids_off = u32_at(0x4c);
        h.field_ids_size = u32_at(0x50);
        h.field_ids_off = u32_at(0x54);
        h.method_ids_size = u32_at(0x58);
        h.method_ids_off = u32_at(0x5c);
        h.class_defs_size = u32_at(0x60);
        h.class_defs_off = u32_at(0x64);
        h.data_size = u32_at(0x68);
        h.data_off = u32_at(0x6c);

        if (h.endian_tag != kEndianTag)
            fail_at(Errc::BadEndianTag, 0x28,
                    "endian tag " + hex32(h.endian_tag) + " (expected 0x12345678)");
        if (h.header_size != kHeaderSize)
            fail_at(Errc::BadHeader, 0x24, "header size is not 0x70");
        if (h.file_size != bytes_.size())
            fail_at(Errc::BadHeader, 0x20,
                    "header file_size " + std::to_string(h.file_size) +
                        " does not match actual size " + std::to_string(bytes_.size()));

        uint32_t computed = adler32_checksum(bytes_.subspan(12));
        auto computed_sig = sha1_digest(bytes_.subspan(32));
        bool checksum_ok = computed == h.checksum;
        bool signature_ok = std::equal(computed_sig.begin(), computed_sig.end(),
                                       h.signature.begin());
        if (info) {
            info->checksum_ok = checksum_ok;
            info->signature_ok = signature_ok;
            info->computed_checksum = computed;
        }
        if (options.verify_checksums) {
            if (!checksum_ok)
                fail_at(Errc::ChecksumMismatch, 0x08,
                        "adler-32 mismatch: stored " + hex32(h.checksum) +
                            ", computed " + hex32(computed));
            if (!signature_ok)
                fail_at(Errc::SignatureMismatch, 0x0c, "sha-1 signature mismatch");
        }

        section_check(h.string_ids_off, h.string_ids_size, 4, "string_ids");
        section_check(h.type_ids_off, h.type_ids_size, 4, "type_ids");
        section_check(h.proto_ids_off, h.proto_ids_size, 12, "proto_ids");
        section_check(h.field_ids_off, h.field_ids_size, 8, "field_ids");
        section_check(h.method_ids_off, h.method_ids_size, 8, "method_ids");
        section_check(h.class_defs_off, h.class_defs_size, 32, "class_defs");
    }

    void parse_strings() {
        const DexHeader& h = dex_.header;
        dex_.strings.reserve(h.string_ids_size);
        for (uint32_t i = 0; i < h.string_ids_size; ++i) {
            uint32_t data_off = u32_at(h.string_ids_off + 4 * i);
            bound_check(data_off, 1, "string_data");
            size_t offset = data_off;
            uint32_t utf16_len = read_uleb128(bytes_, offset);
            std::u16string s = decode_mutf8(bytes_, offset);
            if (s.size() != utf16_len)
                fail_at(Errc::Malformed, data_off,
                        "string_data utf16 length " + std::to_string(utf16_len) +
                            " does not match decoded length " +
                            std::to_string(s.size()));
            dex_.strings.push_back(std::move(s));
        }
    }

    void parse_type_ids() {
        const DexHeader& h = dex_.header;
        dex_.type_ids.reserve(h.type_ids_size);
        for (uint32_t i = 0; i < h.type_ids_size; ++i)
            dex_.type_ids.push_back({u32_at(h.type_ids_off + 4 * i)});
    }

    std::vector<uint16_t> parse_type_list(uint32_t off) {
        if (off == 0) return {};
        bound_check(off, 4, "type_list");
        uint32_t count = u32_at(off);
        bound_check(off + 4, static_cast<size_t>(count) * 2, "type_list entries");
        std::vector<uint16_t> out;
        out.reserve(count);
        for (uint32_t i = 0; i < count; ++i) out.push_back(u16_at(off + 4 + 2 * i));
        return out;
    }

    void parse_proto_ids() {
        const DexHeader& h = dex_.header;
        dex_.proto_ids.reserve(h.proto_ids_size);
        for (uint32_t i = 0; i < h.proto_ids_size; ++i) {
            size_t at = h.proto_ids_off + 12 * i;
            ProtoId p;
            p.shorty_idx = u32_at(at);
            p.return_type_idx = u32_at(at + 4);
            p.parameters = parse_type_list(u32_at(at + 8));
            dex_.proto_ids.push_back(std::move(p));
        }
    }

    void parse_field_ids() {
        const DexHeader& h = dex_.header;
        dex_.field_ids.reserve(h.field_ids_size);
        for (uint32_t i = 0; i < h.field_ids_size; ++i) {
            size_t at = h.field_ids_off + 8 * i;
            dex_.field_ids.push_back({u16_at(at), u16_at(at + 2), u32_at(at + 4)});
        }
    }

    void parse_method_ids() {
        const DexHeader& h = dex_.header;
        dex_.method_ids.reserve(h.method_ids_size);
        for (uint32_t i = 0; i < h.method_ids_size; ++i) {
            size_t at = h.method_ids_off + 8 * i;
            dex_.method_ids.push_back({u16_at(at), u16_at(at + 2), u32_at(at + 4)});
        }
    }

    CodeItem parse_code_item(uint32_t off) {
        if (off % 4 != 0)
            fail_at(Errc::Malformed, off, "code item not 4-byte aligned");
        bound_check(off, 16, "code_item header");
        CodeItem code;
        code.registers_size = u16_at(off);
        code.ins_size = u16_at(off + 2);
        code.outs_size = u16_at(off + 4);
        code.tries_size = u16_at(off + 6);
        uint32_t debug_off = u32_at(off + 8);
        uint32_t insns_size = u32_at(off + 12);
        bound_check(off + 16, static_cast<size_t>(insns_size) * 2, "insns");
        code.insns.reserve(insns_size);
        for (uint32_t i = 0; i < insns_size; ++i)
            code.insns.push_back(u16_at(off + 16 + 2 * i));

        if (code.tries_size > 0) {
            size_t tries_at = off + 16 + 2 * static_cast<size_t>(insns_size);
            if (insns_size % 2 != 0) tries_at += 2;  // alignment halfword
            size_t end = tries_at;
            // Measure: try items, then the encoded handler list.
            bound_check(end, static_cast<size_t>(code.tries_size) * 8, "try items");
            end += static_cast<size_t>(code.tries_size) * 8;
            uint32_t handler_count = read_uleb128(bytes_, end);
            for (uint32_t i = 0; i < handler_count; ++i) {
                int32_t size = read_sleb128(bytes_, end);
                uint32_t pairs = static_cast<uint32_t>(size < 0 ? -int64_t{size} : size);
                for (uint32_t p = 0; p < pairs; ++p) {
                    read_uleb128(bytes_, end);
                    read_uleb128(bytes_, end);
                }
                if (size <= 0) read_uleb128(bytes_, end);
            }
            code.tries_and_handlers.assign(bytes_.begin() + tries_at,
                                           bytes_.begin() + end);
            // Decode once so malformed handler offsets surface at parse time.
            decode_tries(code.tries_and_handlers, code.tries_size);
        }

        if (debug_off != 0) {
            bound_check(debug_off, 1, "debug_info");
            size_t end = debug_off;
            skip_debug_info(bytes_, end);
            code.debug_info.assign(bytes_.begin() + debug_off, bytes_.begin() + end);
        }
        return code;
    }

    ClassData parse_class_data(uint32_t off) {
        bound_check(off, 1, "class_data");
        size_t at = off;
        uint32_t static_n = read_uleb128(bytes_, at);
        uint32_t instance_n = read_uleb128(bytes_, at);
        uint32_t direct_n = read_uleb128(bytes_, at);
        uint32_t virtual_n = read_uleb128(bytes_, at);

        ClassData data;
        auto read_fields = [&](uint32_t n, std::vector<EncodedField>& out) {
            uint32_t idx = 0;
            for (uint32_t i = 0; i < n; ++i) {
                idx += read_uleb128(bytes_, at);
                uint32_t flags = read_uleb128(bytes_, at);
                out.push_back({idx, flags});
            }
        };
        auto read_methods = [&](uint32_t n, std::vector<EncodedMethod>& out) {
            uint32_t idx = 0;
            for (uint32_t i = 0; i < n; ++i) {
                idx += read_uleb128(bytes_, at);
                uint32_t flags = read_uleb128(bytes_, at);
                uint32_t code_off = read_uleb128(bytes_, at);
                EncodedMethod m;
                m.method_idx = idx;
                m.access_flags = flags;
                if (code_off != 0) m.code = parse_code_item(code_off);
                out.push_back(std::move(m));
            }
        };
        read_fields(static_n, data.static_fields);
        read_fields(instance_n, data.instance_fields);
        read_methods(direct_n, data.direct_methods);
        read_methods(virtual_n, data.virtual_methods);
        return data;
    }

    AnnotationSet parse_annotation_set(uint32_t off) {
        bound_check(off, 4, "annotation_set");
        uint32_t count = u32_at(off);
        bound_check(off + 4, static_cast<size_t>(count) * 4, "annotation_set entries");
        AnnotationSet set;
        for (uint32_t i = 0; i < count; ++i) {
            uint32_t item_off = u32_at(off + 4 + 4 * i);
            bound_check(item_off, 1, "annotation item");
            size_t end = item_off + 1;  // visibility byte
            skip_encoded_annotation(bytes_, end);
            set.items.emplace_back(bytes_.begin() + item_off, bytes_.begin() + end);
        }
        return set;
    }

    AnnotationsDirectory parse_annotations_directory(uint32_t off) {
        bound_check(off, 16, "annotations_directory");
        AnnotationsDirectory dir;
        uint32_t class_off = u32_at(off);
        uint32_t fields_n = u32_at(off + 4);
        uint32_t methods_n = u32_at(off + 8);
        uint32_t params_n = u32_at(off + 12);
        size_t at = off + 16;
        bound_check(at, (static_cast<size_t>(fields_n) + methods_n + params_n) * 8,
                    "annotations_directory entries");
        if (class_off != 0) dir.class_annotations = parse_annotation_set(class_off);
        for (uint32_t i = 0; i < fields_n; ++i, at += 8)
            dir.field_annotations.emplace_back(u32_at(at),
                                               parse_annotation_set(u32_at(at + 4)));
        for (uint32_t i = 0; i < methods_n; ++i, at += 8)
            dir.method_annotations.emplace_back(u32_at(at),
                                                parse_annotation_set(u32_at(at + 4)));
        for (uint32_t i = 0; i < params_n; ++i, at += 8) {
            uint32_t method_idx = u32_at(at);
            uint32_t ref_list_off = u32_at(at + 4);
            bound_check(ref_list_off, 4, "annotation_set_ref_list");
            uint32_t count = u32_at(ref_list_off);
            bound_check(ref_list_off + 4, static_cast<size_t>(count) * 4,
                        "annotation_set_ref_list entries");
            std::vector<std::optional<AnnotationSet>> sets;
            for (uint32_t k = 0; k < count; ++k) {
                uint32_t set_off = u32_at(ref_list_off + 4 + 4 * k);
                if (set_off == 0)
                    sets.emplace_back(std::nullopt);
                else
                    sets.emplace_back(parse_annotation_set(set_off));
            }
            dir.parameter_annotations.emplace_back(method_idx, std::move(sets));
        }
        return dir;
    }

    void parse_class_defs() {
        const DexHeader& h = dex_.header;
        dex_.class_defs.reserve(h.class_defs_size);
        for (uint32_t i = 0; i < h.class_defs_size; ++i) {
            size_t at = h.class_defs_off + 32 * i;
            ClassDef c;
            c.class_idx = u32_at(at);
            c.access_flags = u32_at(at + 4);
            c.superclass_idx = u32_at(at + 8);
            c.interfaces = parse_type_list(u32_at(at + 12));
            c.source_file_idx = u32_at(at + 16);
            uint32_t annotations_off = u32_at(at + 20);
            uint32_t class_data_off = u32_at(at + 24);
            uint32_t static_values_off = u32_at(at + 28);
            if (annotations_off != 0)
                c.annotations = parse_annotations_directory(annotations_off);
            if (class_data_off != 0) c.class_data = parse_class_data(class_data_off);
            if (static_values_off != 0) {
                bound_check(static_values_off, 1, "static_values");
                size_t end = static_values_off;
                skip_encoded_array(bytes_, end);
                c.static_values.assign(bytes_.begin() + static_values_off,
                                       bytes_.begin() + end);
            }
            dex_.class_defs.push_back(std::move(c));
        }
    }

    void parse_map_list() {
        uint32_t off = dex_.header.map_off;
        if (off == 0) fail_at(Errc::BadHeader, 0x34, "map_off is zero");
        bound_check(off, 4, "map_list");
        uint32_t count = u32_at(off);
        bound_check(off + 4, static_cast<size_t>(count) * 12, "map_list entries");
        for (uint32_t i = 0; i < count; ++i) {
            size_t at = off + 4 + 12 * i;
            MapItem item;
            item.type = u16_at(at);
            item.size = u32_at(at + 4);
            item.offset = u32_at(at + 8);
            if (item.offset > bytes_.size())
                fail_at(Errc::Malformed, at + 8, "map item offset out of bounds");
            dex_.map_list.push_back(item);
        }
    }
};

// ---------------------------------------------------------------- writing

class Writer {
public:
    explicit Writer(const DexFile& dex) : dex_(dex) {}

    std::vector<uint8_t> run() {
        validate(dex_);
        layout_fixed_sections();
        emit_data();
        return assemble();
    }

private:
    const DexFile& dex_;
    ByteWriter data_;     // data section only; absolute offset = data_off_ + pos
    uint32_t data_off_ = 0;

    std::map<std::vector<uint16_t>, uint32_t> type_list_offs_;
    std::map<std::vector<uint8_t>, uint32_t> annotation_item_offs_;
    std::map<std::vector<uint32_t>, uint32_t> annotation_set_offs_;  // item offsets
    std::map<std::vector<uint32_t>, uint32_t> ref_list_offs_;        // set offsets
    std::map<std::vector<uint8_t>, uint32_t> debug_offs_;
    std::map<std::vector<uint8_t>, uint32_t> static_values_offs_;
    std::vector<uint32_t> directory_offs_;              // per class, 0 = none
    std::vector<uint32_t> class_data_offs_;             // per class, 0 = none
    std::vector<uint32_t> string_data_offs_;            // per string
    // code offset per (class index << 1 | virtual?, method position)
    std::map<std::pair<uint32_t, uint32_t>, uint32_t> code_offs_;

    std::vector<MapItem> map_;

    // data_off_ is always 4-aligned (header and id sections have 4-aligned
    // sizes), so data_.pad_to(4) aligns absolute offsets too.
    uint32_t abs() const { return data_off_ + static_cast<uint32_t>(data_.size()); }

    void layout_fixed_sections() {
        uint32_t off = kHeaderSize;
        off += 4 * static_cast<uint32_t>(dex_.strings.size());
        off += 4 * static_cast<uint32_t>(dex_.type_ids.size());
        off += 12 * static_cast<uint32_t>(dex_.proto_ids.size());
        off += 8 * static_cast<uint32_t>(dex_.field_ids.size());
        off += 8 * static_cast<uint32_t>(dex_.method_ids.size());
        off += 32 * static_cast<uint32_t>(dex_.class_defs.size());
        data_off_ = off;
    }

    uint32_t emit_type_list(const std::vector<uint16_t>& list) {
        if (list.empty()) return 0;
        auto it = type_list_offs_.find(list);
        if (it != type_list_offs_.end()) return it->second;
        data_.pad_to(4);
        uint32_t at = abs();
        data_.u32(static_cast<uint32_t>(list.size()));
        for (uint16_t t : list) data_.u16(t);
        type_list_offs_.emplace(list, at);
        return at;
    }

    uint32_t emit_annotation_item(const std::vector<uint8_t>& blob) {
        auto it = annotation_item_offs_.find(blob);
        if (it != annotation_item_offs_.end()) return it->second;
        uint32_t at = abs();
        data_.raw(blob);
        annotation_item_offs_.emplace(blob, at);
        return at;
    }

    uint32_t emit_annotation_set(const AnnotationSet& set) {
        std::vector<uint32_t> item_offs;
        item_offs.reserve(set.items.size());
        for (const auto& item : set.items)
            item_offs.push_back(annotation_item_offs_.at(item));
        auto it = annotation_set_offs_.find(item_offs);
        if (it != annotation_set_offs_.end()) return it->second;
        data_.pad_to(4);
        uint32_t at = abs();
        data_.u32(static_cast<uint32_t>(item_offs.size()));
        for (uint32_t o : item_offs) data_.u32(o);
        annotation_set_offs_.emplace(std::move(item_offs), at);
        return at;
    }

    uint32_t set_offset(const AnnotationSet& set) const {
        std::vector<uint32_t> item_offs;
        for (const auto& item : set.items)
            item_offs.push_back(annotation_item_offs_.at(item));
        return annotation_set_offs_.at(item_offs);
    }

    template <typename Fn>
    void for_each_annotation_set(Fn&& fn) {
        for (const ClassDef& c : dex_.class_defs) {
            if (!c.annotations) continue;
            const AnnotationsDirectory& dir = *c.annotations;
            if (dir.class_annotations) fn(*dir.class_annotations);
            for (const auto& [idx, set] : dir.field_annotations) fn(set);
            for (const auto& [idx, set] : dir.method_annotations) fn(set);
            for (const auto& [idx, sets] : dir.parameter_annotations)
                for (const auto& set : sets)
                    if (set) fn(*set);
        }
    }

    void emit_data() {
        // 1. type_lists: proto parameters in pool order, then interfaces.
        std::vector<uint32_t> proto_param_offs(dex_.proto_ids.size(), 0);
        for (size_t i = 0; i < dex_.proto_ids.size(); ++i)
            proto_param_offs[i] = emit_type_list(dex_.proto_ids[i].parameters);
        std::vector<uint32_t> interface_offs(dex_.class_defs.size(), 0);
        for (size_t i = 0; i < dex_.class_defs.size(); ++i)
            interface_offs[i] = emit_type_list(dex_.class_defs[i].interfaces);
        add_map_entry(kMapTypeList, static_cast<uint32_t>(type_list_offs_.size()),
                      first_offset(type_list_offs_));
        proto_param_offs_ = std::move(proto_param_offs);
        interface_offs_ = std::move(interface_offs);

        // 2. annotation items (leaves), 3. sets, 4. set_ref_lists, 5. directories.
        uint32_t annotation_start = abs();
        for_each_annotation_set([&](const AnnotationSet& set) {
            for (const auto& item : set.items) emit_annotation_item(item);
        });
        add_map_entry(kMapAnnotation,
                      static_cast<uint32_t>(annotation_item_offs_.size()),
                      annotation_start);

        uint32_t sets_start = abs();
        for_each_annotation_set([&](const AnnotationSet& set) { emit_annotation_set(set); });
        add_map_entry(kMapAnnotationSet,
                      static_cast<uint32_t>(annotation_set_offs_.size()),
                      align_of(sets_start));

        uint32_t ref_lists_start = abs();
        for (const ClassDef& c : dex_.class_defs) {
            if (!c.annotations) continue;
            for (const auto& [idx, sets] : c.annotations->parameter_annotations)
                emit_ref_list(sets);
        }
        add_map_entry(kMapAnnotationSetRefList,
                      static_cast<uint32_t>(ref_list_offs_.size()),
                      align_of(ref_lists_start));

        uint32_t dirs_start = abs();
        uint32_t dir_count = 0;
        directory_offs_.assign(dex_.class_defs.size(), 0);
        for (size_t i = 0; i < dex_.class_defs.size(); ++i) {
            if (!dex_.class_defs[i].annotations) continue;
            directory_offs_[i] = emit_directory(*dex_.class_defs[i].annotations);
            ++dir_count;
        }
        add_map_entry(kMapAnnotationsDirectory, dir_count, align_of(dirs_start));

        // 6. debug_info blobs.
        uint32_t debug_start = abs();
        for_each_code([&](const CodeItem& code, uint32_t, uint32_t) {
            if (code.debug_info.empty()) return;
            if (!debug_offs_.contains(code.debug_info)) {
                uint32_t at = abs();
                data_.raw(code.debug_info);
                debug_offs_.emplace(code.debug_info, at);
            }
        });
        add_map_entry(kMapDebugInfo, static_cast<uint32_t>(debug_offs_.size()),
                      debug_start);

        // 7. code items.
        uint32_t code_start = abs();
        uint32_t code_count = 0;
        for_each_code([&](const CodeItem& code, uint32_t list_key, uint32_t pos) {
            data_.pad_to(4);
            uint32_t at = abs();
            data_.u16(code.registers_size);
            data_.u16(code.ins_size);
            data_.u16(code.outs_size);
            data_.u16(code.tries_size);
            data_.u32(code.debug_info.empty() ? 0 : debug_offs_.at(code.debug_info));
            data_.u32(static_cast<uint32_t>(code.insns.size()));
            for (uint16_t unit : code.insns) data_.u16(unit);
            if (code.tries_size > 0) {
                if (code.insns.size() % 2 != 0) data_.u16(0);
                data_.raw(code.tries_and_handlers);
            }
            code_offs_[{list_key, pos}] = at;
            ++code_count;
        });
        add_map_entry(kMapCode, code_count, align_of(code_start));

        // 8. class_data items.
        uint32_t class_data_start = abs();
        uint32_t class_data_count = 0;
        class_data_offs_.assign(dex_.class_defs.size(), 0);
        for (size_t i = 0; i < dex_.class_defs.size(); ++i) {
            const ClassDef& c = dex_.class_defs[i];
            if (!c.class_data) continue;
            class_data_offs_[i] = emit_class_data(static_cast<uint32_t>(i), *c.class_data);
            ++class_data_count;
        }
        add_map_entry(kMapClassData, class_data_count, class_data_start);

        // 9. string_data items, in string id order.
        uint32_t string_data_start = abs();
        string_data_offs_.reserve(dex_.strings.size());
        for (const std::u16string& s : dex_.strings) {
            string_data_offs_.push_back(abs());
            std::vector<uint8_t> payload = encode_mutf8(s);
            std::vector<uint8_t> len;
            write_uleb128(len, static_cast<uint32_t>(s.size()));
            data_.raw(len);
            data_.raw(payload);
            data_.u8(0);
        }
        add_map_entry(kMapStringData, static_cast<uint32_t>(dex_.strings.size()),
                      string_data_start);

        // 10. static_values encoded arrays.
        uint32_t static_start = abs();
        static_values_class_offs_.assign(dex_.class_defs.size(), 0);
        for (size_t i = 0; i < dex_.class_defs.size(); ++i) {
            const auto& blob = dex_.class_defs[i].static_values;
            if (blob.empty()) continue;
            auto it = static_values_offs_.find(blob);
            if (it == static_values_offs_.end()) {
                uint32_t at = abs();
                data_.raw(blob);
                it = static_values_offs_.emplace(blob, at).first;
            }
            static_values_class_offs_[i] = it->second;
        }
        add_map_entry(kMapEncodedArray,
                      static_cast<uint32_t>(static_values_offs_.size()), static_start);

        // 11. map list closes the data section.
        data_.pad_to(4);
        map_off_ = abs();
    }

    uint32_t emit_ref_list(const std::vector<std::optional<AnnotationSet>>& sets) {
        std::vector<uint32_t> offs;
        offs.reserve(sets.size());
        for (const auto& set : sets) offs.push_back(set ? set_offset(*set) : 0);
        auto it = ref_list_offs_.find(offs);
        if (it != ref_list_offs_.end()) return it->second;
        data_.pad_to(4);
        uint32_t at = abs();
        data_.u32(static_cast<uint32_t>(offs.size()));
        for (uint32_t o : offs) data_.u32(o);
        ref_list_offs_.emplace(std::move(offs), at);
        return at;
    }

    uint32_t ref_list_offset(const std::vector<std::optional<AnnotationSet>>& sets) const {
        std::vector<uint32_t> offs;
        for (const auto& set : sets) offs.push_back(set ? set_offset(*set) : 0);
        return ref_list_offs_.at(offs);
    }

    uint32_t emit_directory(const AnnotationsDirectory& dir) {
        data_.pad_to(4);
        uint32_t at = abs();
        data_.u32(dir.class_annotations ? set_offset(*dir.class_annotations) : 0);
        data_.u32(static_cast<uint32_t>(dir.field_annotations.size()));
        data_.u32(static_cast<uint32_t>(dir.method_annotations.size()));
        data_.u32(static_cast<uint32_t>(dir.parameter_annotations.size()));
        for (const auto& [idx, set] : dir.field_annotations) {
            data_.u32(idx);
            data_.u32(set_offset(set));
        }
        for (const auto& [idx, set] : dir.method_annotations) {
            data_.u32(idx);
            data_.u32(set_offset(set));
        }
        for (const auto& [idx, sets] : dir.parameter_annotations) {
            data_.u32(idx);
            data_.u32(ref_list_offset(sets));
        }
        return at;
    }

    uint32_t emit_class_data(uint32_t class_index, const ClassData& d) {
        uint32_t at = abs();
        std::vector<uint8_t> buf;
        write_uleb128(buf, static_cast<uint32_t>(d.static_fields.size()));
        write_uleb128(buf, static_cast<uint32_t>(d.instance_fields.size()));
        write_uleb128(buf, static_cast<uint32_t>(d.direct_methods.size()));
        write_uleb128(buf, static_cast<uint32_t>(d.virtual_methods.size()));
        auto put_fields = [&](const std::vector<EncodedField>& fields) {
            uint32_t prev = 0;
            for (size_t i = 0; i < fields.size(); ++i) {
                write_uleb128(buf, fields[i].field_idx - (i == 0 ? 0 : prev));
                write_uleb128(buf, fields[i].access_flags);
                prev = fields[i].field_idx;
            }
        };
        auto put_methods = [&](const std::vector<EncodedMethod>& methods,
                               uint32_t list_key) {
            uint32_t prev = 0;
            for (size_t i = 0; i < methods.size(); ++i) {
                write_uleb128(buf, methods[i].method_idx - (i == 0 ? 0 : prev));
                write_uleb128(buf, methods[i].access_flags);
                uint32_t code_off = 0;
                if (methods[i].code)
                    code_off = code_offs_.at({list_key, static_cast<uint32_t>(i)});
                write_uleb128(buf, code_off);
                prev = methods[i].method_idx;
            }
        };
        put_fields(d.static_fields);
        put_fields(d.instance_fields);
        put_methods(d.direct_methods, class_index * 2);
        put_methods(d.virtual_methods, class_index * 2 + 1);
        data_.raw(buf);
        return at;
    }

    // Visits every code item with a stable (list_key, position) key:
    // list_key = class index * 2 (+1 for virtual methods).
    template <typename Fn>
    void for_each_code(Fn&& fn) {
        for (size_t i = 0; i < dex_.class_defs.size(); ++i) {
            const ClassDef& c = dex_.class_defs[i];
            if (!c.class_data) continue;
            uint32_t base = static_cast<uint32_t>(i) * 2;
            const auto& dm = c.class_data->direct_methods;
            for (size_t k = 0; k < dm.size(); ++k)
                if (dm[k].code) fn(*dm[k].code, base, static_cast<uint32_t>(k));
            const auto& vm = c.class_data->virtual_methods;
            for (size_t k = 0; k < vm.size(); ++k)
                if (vm[k].code) fn(*vm[k].code, base + 1, static_cast<uint32_t>(k));
        }
    }

    void add_map_entry(uint16_t type, uint32_t count, uint32_t offset) {
        if (count > 0) map_.push_back({type, count, offset});
    }

    // First data offset of a dedup section; callers record the section start
    // before emitting, but the first item may have added alignment padding.
    template <typename M>
    uint32_t first_offset(const M& m) const {
        uint32_t best = 0;
        bool any = false;
        for (const auto& [k, v] : m) {
            if (!any || v < best) best = v;
            any = true;
        }
        return best;
    }

    uint32_t align_of(uint32_t start) const { return (start + 3u) & ~3u; }

    std::vector<uint8_t> assemble() {
        ByteWriter out;
        const uint32_t string_ids_off = dex_.strings.empty() ? 0 : kHeaderSize;
        uint32_t at = kHeaderSize + 4 * static_cast<uint32_t>(dex_.strings.size());
        const uint32_t type_ids_off = dex_.type_ids.empty() ? 0 : at;
        at += 4 * static_cast<uint32_t>(dex_.type_ids.size());
        const uint32_t proto_ids_off = dex_.proto_ids.empty() ? 0 : at;
        at += 12 * static_cast<uint32_t>(dex_.proto_ids.size());
        const uint32_t field_ids_off = dex_.field_ids.empty() ? 0 : at;
        at += 8 * static_cast<uint32_t>(dex_.field_ids.size());
        const uint32_t method_ids_off = dex_.method_ids.empty() ? 0 : at;
        at += 8 * static_cast<uint32_t>(dex_.method_ids.size());
        const uint32_t class_defs_off = dex_.class_defs.empty() ? 0 : at;

        // Map list bytes appended after the collected data section.
        std::vector<MapItem> map = map_;
        std::vector<MapItem> head_entries = {
            {kMapHeader, 1, 0},
            {kMapStringId, static_cast<uint32_t>(dex_.strings.size()), string_ids_off},
            {kMapTypeId, static_cast<uint32_t>(dex_.type_ids.size()), type_ids_off},
            {kMapProtoId, static_cast<uint32_t>(dex_.proto_ids.size()), proto_ids_off},
            {kMapFieldId, static_cast<uint32_t>(dex_.field_ids.size()), field_ids_off},
            {kMapMethodId, static_cast<uint32_t>(dex_.method_ids.size()), method_ids_off},
            {kMapClassDef, static_cast<uint32_t>(dex_.class_defs.size()), class_defs_off},
        };
        std::vector<MapItem> final_map;
        for (const MapItem& e : head_entries)
            if (e.size > 0) final_map.push_back(e);
        for (const MapItem& e : map) final_map.push_back(e);
        final_map.push_back({kMapMapList, 1, map_off_});

        uint32_t map_bytes = 4 + 12 * static_cast<uint32_t>(final_map.size());
        uint32_t file_size = map_off_ + map_bytes;

        // Header.
        out.raw(std::span<const uint8_t>(kDexMagic035.data(), 8));
        out.u32(0);                      // checksum, fixed below
        for (int i = 0; i < 20; ++i) out.u8(0);  // signature, fixed below
        out.u32(file_size);
        out.u32(kHeaderSize);
        out.u32(kEndianTag);
        out.u32(0);  // link_size
        out.u32(0);  // link_off
        out.u32(map_off_);
        out.u32(static_cast<uint32_t>(dex_.strings.size()));
        out.u32(string_ids_off);
        out.u32(static_cast<uint32_t>(dex_.type_ids.size()));
        out.u32(type_ids_off);
        out.u32(static_cast<uint32_t>(dex_.proto_ids.size()));
        out.u32(proto_ids_off);
        out.u32(static_cast<uint32_t>(dex_.field_ids.size()));
        out.u32(field_ids_off);
        out.u32(static_cast<uint32_t>(dex_.method_ids.size()));
        out.u32(method_ids_off);
        out.u32(static_cast<uint32_t>(dex_.class_defs.size()));
        out.u32(class_defs_off);
        out.u32(file_size - data_off_);  // data_size
        out.u32(data_off_);

        for (uint32_t off : string_data_offs_) out.u32(off);
        for (const TypeId& t : dex_.type_ids) out.u32(t.descriptor_idx);
        for (size_t i = 0; i < dex_.proto_ids.size(); ++i) {
            out.u32(dex_.proto_ids[i].shorty_idx);
            out.u32(dex_.proto_ids[i].return_type_idx);
            out.u32(proto_param_offs_[i]);
        }
        for (const FieldId& f : dex_.field_ids) {
            out.u16(f.class_idx);
            out.u16(f.type_idx);
            out.u32(f.name_idx);
        }
        for (const MethodId& m : dex_.method_ids) {
            out.u16(m.class_idx);
            out.u16(m.proto_idx);
            out.u32(m.name_idx);
        }
        for (size_t i = 0; i < dex_.class_defs.size(); ++i) {
            const ClassDef& c = dex_.class_defs[i];
            out.u32(c.class_idx);
            out.u32(c.access_flags);
            out.u32(c.superclass_idx);
            out.u32(interface_offs_[i]);
            out.u32(c.source_file_idx);
            out.u32(directory_offs_[i]);
            out.u32(class_data_offs_[i]);
            out.u32(static_values_class_offs_[i]);
        }

        out.raw(data_.bytes());

        // Map list.
        out.u32(static_cast<uint32_t>(final_map.size()));
        for (const MapItem& e : final_map) {
            out.u16(e.type);
            out.u16(0);
            out.u32(e.size);
            out.u32(e.offset);
        }

        std::vector<uint8_t> bytes = std::move(out.bytes());
        fix_checksums(bytes);
        return bytes;
    }

    std::vector<uint32_t> proto_param_offs_;
    std::vector<uint32_t> interface_offs_;
    std::vector<uint32_t> static_values_class_offs_;
    uint32_t map_off_ = 0;
};

}  // namespace

DexFile parse_dex(std::span<const uint8_t> bytes, const ParseOptions& options,
                  ParseInfo* info) {
    return Parser(bytes).run(options, info);
}

std::vector<uint8_t> write_dex(const DexFile& dex) {
    return Writer(dex).run();
}

void fix_checksums(std::span<uint8_t> bytes) {
    if (bytes.size() < kHeaderSize)
        fail(Errc::Truncated, "buffer shorter than dex header");
    if (!std::equal(kDexMagic035.begin(), kDexMagic035.begin() + 4, bytes.begin()))
        fail(Errc::BadMagic, "buffer is not a dex file");
    auto signature = sha1_digest(bytes.subspan(32));
    std::copy(signature.begin(), signature.end(), bytes.begin() + 12);
    store_u32(bytes.data() + 8, adler32_checksum(bytes.subspan(12)));
}

}  // namespace dexpatch
