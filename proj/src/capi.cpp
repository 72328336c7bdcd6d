#include "dexpatch.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "apk.hpp"
#include "blacklist.hpp"
#include "dex_io.hpp"
#include "dex_model.hpp"
#include "error.hpp"
#include "patcher.hpp"
#include "resolver.hpp"

#define DXP_EXPORT __attribute__((visibility("default")))

using namespace dexpatch;

struct dxp_dex {
    DexFile file;
    ParseInfo info{true, true, 0};
};

struct dxp_blacklist {
    Blacklist list;
};

struct dxp_report {
    PatchReport report;
    std::string text;
    std::string tsv;
};

struct dxp_strlist {
    std::vector<std::string> items;
};

namespace {

thread_local std::string g_last_error = "no error";

dxp_status status_of(const DexError& e) {
    switch (e.code()) {
        case Errc::Io:
            return DXP_E_IO;
        case Errc::Capacity:
        case Errc::NameCollision:
        case Errc::Unsupported:
            return DXP_E_PATCH;
        default:
            return DXP_E_FORMAT;
    }
}

dxp_status set_error(const DexError& e) {
    g_last_error = e.what();
    return status_of(e);
}

dxp_status invalid(const char* message) {
    g_last_error = message;
    return DXP_E_INVALID;
}

template <typename Fn>
dxp_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const DexError& e) {
        return set_error(e);
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return DXP_E_IO;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return DXP_E_FORMAT;
    }
}

std::vector<uint8_t> read_file(const char* path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::Io, std::string("cannot open ") + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    if (in.bad()) fail(Errc::Io, std::string("read failed for ") + path);
    return bytes;
}

void write_file(const char* path, std::span<const uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::Io, std::string("cannot create ") + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(Errc::Io, std::string("write failed for ") + path);
}

dxp_status parse_impl(const uint8_t* bytes, size_t size, bool strict, dxp_dex** out) {
    if (!bytes || !out) return invalid("null argument");
    return guarded([&] {
        auto handle = std::make_unique<dxp_dex>();
        ParseOptions options;
        options.verify_checksums = strict;
        handle->file = parse_dex({bytes, size}, options, &handle->info);
        *out = handle.release();
        return DXP_OK;
    });
}

dxp_report* make_report(PatchReport&& r) {
    auto* report = new dxp_report{std::move(r), {}, {}};
    report->text = report->report.to_text();
    report->tsv = report->report.to_tsv();
    return report;
}

}  // namespace

extern "C" {

DXP_EXPORT const char* dxp_last_error(void) { return g_last_error.c_str(); }

DXP_EXPORT dxp_status dxp_dex_parse(const uint8_t* bytes, size_t size, dxp_dex** out) {
    return parse_impl(bytes, size, true, out);
}

DXP_EXPORT dxp_status dxp_dex_parse_lenient(const uint8_t* bytes, size_t size,
                                            dxp_dex** out) {
    return parse_impl(bytes, size, false, out);
}

DXP_EXPORT void dxp_dex_free(dxp_dex* dex) { delete dex; }

DXP_EXPORT dxp_status dxp_dex_get_info(const dxp_dex* dex, dxp_dex_info* out) {
    if (!dex || !out) return invalid("null argument");
    std::memcpy(out->version, dex->file.header.magic.data() + 4, 3);
    out->version[3] = '\0';
    out->checksum_ok = dex->info.checksum_ok ? 1 : 0;
    out->signature_ok = dex->info.signature_ok ? 1 : 0;
    out->string_ids = static_cast<uint32_t>(dex->file.strings.size());
    out->type_ids = static_cast<uint32_t>(dex->file.type_ids.size());
    out->proto_ids = static_cast<uint32_t>(dex->file.proto_ids.size());
    out->field_ids = static_cast<uint32_t>(dex->file.field_ids.size());
    out->method_ids = static_cast<uint32_t>(dex->file.method_ids.size());
    out->class_defs = static_cast<uint32_t>(dex->file.class_defs.size());
    return DXP_OK;
}

DXP_EXPORT dxp_status dxp_dex_write(const dxp_dex* dex, uint8_t** out,
                                    size_t* out_size) {
    if (!dex || !out || !out_size) return invalid("null argument");
    return guarded([&] {
        std::vector<uint8_t> bytes = write_dex(dex->file);
        auto* buf = static_cast<uint8_t*>(std::malloc(bytes.size()));
        if (!buf) fail(Errc::Io, "out of memory");
        std::memcpy(buf, bytes.data(), bytes.size());
        *out = buf;
        *out_size = bytes.size();
        return DXP_OK;
    });
}

DXP_EXPORT void dxp_bytes_free(uint8_t* bytes) { std::free(bytes); }

DXP_EXPORT dxp_status dxp_dex_list_methods(const dxp_dex* dex,
                                           const char* class_descriptor,
                                           dxp_strlist** out) {
    if (!dex || !out) return invalid("null argument");
    return guarded([&] {
        auto list = std::make_unique<dxp_strlist>();
        auto append_class = [&](const std::string& descriptor) {
            for (const ClassMethod& m : list_class_methods(dex->file, descriptor))
                list->items.push_back(m.descriptor.canonical());
        };
        if (class_descriptor) {
            append_class(class_descriptor);
        } else {
            for (const ClassDef& c : dex->file.class_defs)
                append_class(resolve_type(dex->file, c.class_idx));
        }
        *out = list.release();
        return DXP_OK;
    });
}

DXP_EXPORT size_t dxp_strlist_count(const dxp_strlist* list) {
    return list ? list->items.size() : 0;
}

DXP_EXPORT const char* dxp_strlist_get(const dxp_strlist* list, size_t index) {
    if (!list || index >= list->items.size()) return nullptr;
    return list->items[index].c_str();
}

DXP_EXPORT void dxp_strlist_free(dxp_strlist* list) { delete list; }

DXP_EXPORT dxp_status dxp_blacklist_parse(const char* text, dxp_blacklist** out) {
    if (!text || !out) return invalid("null argument");
    return guarded([&] {
        auto handle = std::make_unique<dxp_blacklist>();
        handle->list = parse_blacklist(text);
        *out = handle.release();
        return DXP_OK;
    });
}

DXP_EXPORT void dxp_blacklist_free(dxp_blacklist* blacklist) { delete blacklist; }

DXP_EXPORT size_t dxp_blacklist_count(const dxp_blacklist* blacklist) {
    return blacklist ? blacklist->list.entries.size() : 0;
}

DXP_EXPORT dxp_status dxp_blacklist_warnings(const dxp_blacklist* blacklist,
                                             dxp_strlist** out) {
    if (!blacklist || !out) return invalid("null argument");
    auto list = std::make_unique<dxp_strlist>();
    list->items = blacklist->list.warnings;
    *out = list.release();
    return DXP_OK;
}

DXP_EXPORT dxp_status dxp_patch(const dxp_dex* dex, const dxp_blacklist* blacklist,
                                const char* stub_class, dxp_dex** out,
                                dxp_report** out_report) {
    if (!dex || !blacklist || !out || !out_report) return invalid("null argument");
    return guarded([&] {
        PatchOptions options;
        if (stub_class) options.stub_class = stub_class;
        PatchResult result = patch_dex(dex->file, blacklist->list, options);
        auto handle = std::make_unique<dxp_dex>();
        handle->file = std::move(result.dex);
        *out = handle.release();
        *out_report = make_report(std::move(result.report));
        return DXP_OK;
    });
}

DXP_EXPORT uint32_t dxp_report_patched_sites(const dxp_report* report) {
    return report ? report->report.patched_sites : 0;
}

DXP_EXPORT uint32_t dxp_report_scanned_methods(const dxp_report* report) {
    return report ? report->report.scanned_methods : 0;
}

DXP_EXPORT uint32_t dxp_report_scanned_instructions(const dxp_report* report) {
    return report ? report->report.scanned_instructions : 0;
}

DXP_EXPORT const char* dxp_report_text(const dxp_report* report) {
    return report ? report->text.c_str() : "";
}

DXP_EXPORT const char* dxp_report_tsv(const dxp_report* report) {
    return report ? report->tsv.c_str() : "";
}

DXP_EXPORT void dxp_report_free(dxp_report* report) { delete report; }

DXP_EXPORT dxp_status dxp_apk_patch_file(const char* apk_in, const char* apk_out,
                                         const char* blacklist_text,
                                         const char* stub_class,
                                         dxp_report** out_report) {
    if (!apk_in || !blacklist_text || !out_report) return invalid("null argument");
    return guarded([&] {
        std::vector<uint8_t> bytes = read_file(apk_in);
        ApkArchive apk = open_apk(bytes);
        if (is_multidex(apk))
            fail(Errc::Unsupported,
                 "multidex APK: more than one classes dex entry is not supported");
        const ZipEntry* dex_entry = apk.find("classes.dex");
        if (!dex_entry)
            fail(Errc::Unsupported, std::string(apk_in) + " has no classes.dex");
        std::vector<uint8_t> dex_bytes = zip_extract(*dex_entry);
        DexFile dex = parse_dex(dex_bytes);

        Blacklist blacklist = parse_blacklist(blacklist_text);
        PatchOptions options;
        if (stub_class) options.stub_class = stub_class;
        PatchResult result = patch_dex(dex, blacklist, options);

        if (apk_out) {
            std::vector<uint8_t> new_dex = write_dex(result.dex);
            std::vector<uint8_t> new_apk = repack(apk, new_dex, true);
            write_file(apk_out, new_apk);
        }
        *out_report = make_report(std::move(result.report));
        return DXP_OK;
    });
}

}  // extern "C"
