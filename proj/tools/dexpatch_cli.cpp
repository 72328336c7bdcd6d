#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dexpatch.h"

namespace {

// Mirrors blacklists/default.txt; used when -b is not given.
constexpr const char* kDefaultBlacklist =
    "# Methods whose call sites are redirected to generated stubs.\n"
    "Landroid/telephony/TelephonyManager;->getDeviceId()Ljava/lang/String;\n";

constexpr int kExitUsage = 1;
constexpr int kExitIo = 4;

int fail_status(dxp_status status) {
    std::cerr << "error: " << dxp_last_error() << "\n";
    return static_cast<int>(status);
}

std::optional<std::vector<uint8_t>> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open " << path << "\n";
        return std::nullopt;
    }
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    if (in.bad()) {
        std::cerr << "error: read failed for " << path << "\n";
        return std::nullopt;
    }
    return bytes;
}

bool write_file(const std::string& path, const uint8_t* data, size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        std::cerr << "error: cannot create " << path << "\n";
        return false;
    }
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) {
        std::cerr << "error: write failed for " << path << "\n";
        return false;
    }
    return true;
}

// nullopt = use the built-in default policy.
std::optional<std::string> load_blacklist_text(const std::optional<std::string>& path,
                                               bool& io_error) {
    io_error = false;
    if (!path) return std::string(kDefaultBlacklist);
    std::ifstream in(*path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open blacklist " << *path << "\n";
        io_error = true;
        return std::nullopt;
    }
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    if (in.bad()) {
        std::cerr << "error: read failed for " << *path << "\n";
        io_error = true;
        return std::nullopt;
    }
    return text;
}

bool emit_report(const dxp_report* report, bool tsv,
                 const std::optional<std::string>& report_path) {
    const char* body = tsv ? dxp_report_tsv(report) : dxp_report_text(report);
    if (!report_path) {
        std::cout << body;
        return true;
    }
    std::ofstream out(*report_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        std::cerr << "error: cannot create " << *report_path << "\n";
        return false;
    }
    out << body;
    if (!out) {
        std::cerr << "error: write failed for " << *report_path << "\n";
        return false;
    }
    return true;
}

void print_warnings(const dxp_blacklist* blacklist) {
    dxp_strlist* warnings = nullptr;
    if (dxp_blacklist_warnings(blacklist, &warnings) != DXP_OK) return;
    for (size_t i = 0; i < dxp_strlist_count(warnings); ++i)
        std::cerr << "warning: " << dxp_strlist_get(warnings, i) << "\n";
    dxp_strlist_free(warnings);
}

int cmd_inspect(const std::string& dex_path) {
    auto bytes = read_file(dex_path);
    if (!bytes) return kExitIo;
    dxp_dex* dex = nullptr;
    dxp_status status = dxp_dex_parse_lenient(bytes->data(), bytes->size(), &dex);
    if (status != DXP_OK) return fail_status(status);
    dxp_dex_info info{};
    dxp_dex_get_info(dex, &info);
    std::cout << "version:    " << info.version << "\n"
              << "checksum:   " << (info.checksum_ok ? "ok" : "MISMATCH") << "\n"
              << "signature:  " << (info.signature_ok ? "ok" : "MISMATCH") << "\n"
              << "string_ids: " << info.string_ids << "\n"
              << "type_ids:   " << info.type_ids << "\n"
              << "proto_ids:  " << info.proto_ids << "\n"
              << "field_ids:  " << info.field_ids << "\n"
              << "method_ids: " << info.method_ids << "\n"
              << "class_defs: " << info.class_defs << "\n";
    dxp_dex_free(dex);
    return 0;
}

int cmd_methods(const std::string& dex_path,
                const std::optional<std::string>& class_filter) {
    auto bytes = read_file(dex_path);
    if (!bytes) return kExitIo;
    dxp_dex* dex = nullptr;
    dxp_status status = dxp_dex_parse(bytes->data(), bytes->size(), &dex);
    if (status != DXP_OK) return fail_status(status);
    dxp_strlist* list = nullptr;
    status = dxp_dex_list_methods(dex, class_filter ? class_filter->c_str() : nullptr,
                                  &list);
    if (status != DXP_OK) {
        dxp_dex_free(dex);
        return fail_status(status);
    }
    for (size_t i = 0; i < dxp_strlist_count(list); ++i)
        std::cout << dxp_strlist_get(list, i) << "\n";
    dxp_strlist_free(list);
    dxp_dex_free(dex);
    return 0;
}

struct PatchFlags {
    std::optional<std::string> blacklist_path;
    std::string stub_class;
    std::optional<std::string> report_path;
    bool tsv = false;
    bool dry_run = false;
};

int cmd_patch(const std::string& dex_in, const std::optional<std::string>& dex_out,
              const PatchFlags& flags) {
    if (!flags.dry_run && !dex_out) {
        std::cerr << "error: output path required unless --dry-run\n";
        return kExitUsage;
    }
    auto bytes = read_file(dex_in);
    if (!bytes) return kExitIo;
    bool io_error = false;
    auto blacklist_text = load_blacklist_text(flags.blacklist_path, io_error);
    if (!blacklist_text) return kExitIo;

    dxp_dex* dex = nullptr;
    dxp_status status = dxp_dex_parse(bytes->data(), bytes->size(), &dex);
    if (status != DXP_OK) return fail_status(status);

    dxp_blacklist* blacklist = nullptr;
    status = dxp_blacklist_parse(blacklist_text->c_str(), &blacklist);
    if (status != DXP_OK) {
        dxp_dex_free(dex);
        return fail_status(status);
    }
    print_warnings(blacklist);

    dxp_dex* patched = nullptr;
    dxp_report* report = nullptr;
    status = dxp_patch(dex, blacklist,
                       flags.stub_class.empty() ? nullptr : flags.stub_class.c_str(),
                       &patched, &report);
    dxp_blacklist_free(blacklist);
    dxp_dex_free(dex);
    if (status != DXP_OK) return fail_status(status);

    int rc = 0;
    if (!flags.dry_run) {
        uint8_t* out_bytes = nullptr;
        size_t out_size = 0;
        status = dxp_dex_write(patched, &out_bytes, &out_size);
        if (status != DXP_OK) {
            rc = fail_status(status);
        } else {
            if (!write_file(*dex_out, out_bytes, out_size)) rc = kExitIo;
            dxp_bytes_free(out_bytes);
        }
    }
    if (rc == 0 && !emit_report(report, flags.tsv, flags.report_path)) rc = kExitIo;
    dxp_report_free(report);
    dxp_dex_free(patched);
    return rc;
}

int cmd_apk_patch(const std::string& apk_in, const std::optional<std::string>& apk_out,
                  const PatchFlags& flags) {
    if (!flags.dry_run && !apk_out) {
        std::cerr << "error: output path required unless --dry-run\n";
        return kExitUsage;
    }
    bool io_error = false;
    auto blacklist_text = load_blacklist_text(flags.blacklist_path, io_error);
    if (!blacklist_text) return kExitIo;

    dxp_report* report = nullptr;
    dxp_status status = dxp_apk_patch_file(
        apk_in.c_str(), flags.dry_run ? nullptr : apk_out->c_str(),
        blacklist_text->c_str(),
        flags.stub_class.empty() ? nullptr : flags.stub_class.c_str(), &report);
    if (status != DXP_OK) return fail_status(status);

    int rc = emit_report(report, flags.tsv, flags.report_path) ? 0 : kExitIo;
    dxp_report_free(report);
    return rc;
}

void add_patch_flags(CLI::App* cmd, PatchFlags& flags) {
    cmd->add_option("-b,--blacklist", flags.blacklist_path,
                    "blacklist file (default: built-in policy)");
    cmd->add_option("--stub-class", flags.stub_class,
                    "stub class descriptor (default Lru/innopolis/Stub;)");
    cmd->add_option("--report", flags.report_path,
                    "write the report to this file instead of stdout");
    cmd->add_flag("--tsv", flags.tsv, "tab-separated report, one line per site");
    cmd->add_flag("--dry-run", flags.dry_run, "scan and report without writing output");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"static call-site patcher for dex v035 files and APKs"};
    app.require_subcommand(1);

    std::string dex_path;
    auto* inspect = app.add_subcommand("inspect", "print header and pool summary");
    inspect->add_option("dex", dex_path, "dex file")->required();

    std::string methods_path;
    std::optional<std::string> class_filter;
    auto* methods = app.add_subcommand("methods", "list method signatures");
    methods->add_option("dex", methods_path, "dex file")->required();
    methods->add_option("-c,--class", class_filter,
                        "only this class (descriptor form, e.g. Lcom/app/Main;)");

    std::string patch_in;
    std::optional<std::string> patch_out;
    PatchFlags patch_flags;
    auto* patch = app.add_subcommand("patch", "patch blacklisted calls in a dex file");
    patch->add_option("input", patch_in, "input dex")->required();
    patch->add_option("output", patch_out, "output dex");
    add_patch_flags(patch, patch_flags);

    std::string apk_in;
    std::optional<std::string> apk_out;
    PatchFlags apk_flags;
    auto* apk = app.add_subcommand("apk-patch",
                                   "patch classes.dex inside an APK (output unsigned)");
    apk->add_option("input", apk_in, "input APK")->required();
    apk->add_option("output", apk_out, "output APK");
    add_patch_flags(apk, apk_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    if (inspect->parsed()) return cmd_inspect(dex_path);
    if (methods->parsed()) return cmd_methods(methods_path, class_filter);
    if (patch->parsed()) return cmd_patch(patch_in, patch_out, patch_flags);
    if (apk->parsed()) return cmd_apk_patch(apk_in, apk_out, apk_flags);
    return kExitUsage;
}
