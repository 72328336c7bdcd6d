#ifndef DEXPATCH_H
#define DEXPATCH_H

/* dexpatch: static call-site patching for dex v035 files and APKs.
 *
 * All functions return dxp_status; every non-OK return leaves a
 * human-readable message in dxp_last_error() (thread-local). Out-pointers
 * are written only on DXP_OK. Objects are freed with their matching
 * *_free function; buffers from dxp_dex_write with dxp_bytes_free.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dxp_status {
    DXP_OK = 0,
    DXP_E_INVALID = 1, /* bad arguments */
    DXP_E_FORMAT = 2,  /* dex/zip/blacklist parse or validation failure */
    DXP_E_PATCH = 3,   /* patch pipeline failure (collision, capacity, multidex) */
    DXP_E_IO = 4,      /* filesystem failure */
} dxp_status;

typedef struct dxp_dex dxp_dex;
typedef struct dxp_blacklist dxp_blacklist;
typedef struct dxp_report dxp_report;
typedef struct dxp_strlist dxp_strlist;

/* Message for the most recent failure on this thread; never NULL. */
const char* dxp_last_error(void);

/* ---- dex ---- */

/* Strict parse: header checksum and signature must verify. */
dxp_status dxp_dex_parse(const uint8_t* bytes, size_t size, dxp_dex** out);

/* Lenient parse: structure still fully validated, stale checksums allowed
 * (their validity is reported by dxp_dex_get_info). */
dxp_status dxp_dex_parse_lenient(const uint8_t* bytes, size_t size, dxp_dex** out);

void dxp_dex_free(dxp_dex* dex);

typedef struct dxp_dex_info {
    char version[4]; /* "035", NUL-terminated */
    int checksum_ok;
    int signature_ok;
    uint32_t string_ids;
    uint32_t type_ids;
    uint32_t proto_ids;
    uint32_t field_ids;
    uint32_t method_ids;
    uint32_t class_defs;
} dxp_dex_info;

dxp_status dxp_dex_get_info(const dxp_dex* dex, dxp_dex_info* out);

/* Serializes with canonical layout and repaired checksums. */
dxp_status dxp_dex_write(const dxp_dex* dex, uint8_t** out, size_t* out_size);
void dxp_bytes_free(uint8_t* bytes);

/* Canonical method descriptors, one per list element. class_descriptor
 * NULL = all classes in class_defs order; an unknown class yields an
 * empty list. */
dxp_status dxp_dex_list_methods(const dxp_dex* dex, const char* class_descriptor,
                                dxp_strlist** out);

/* ---- string lists ---- */

size_t dxp_strlist_count(const dxp_strlist* list);
const char* dxp_strlist_get(const dxp_strlist* list, size_t index);
void dxp_strlist_free(dxp_strlist* list);

/* ---- blacklist ---- */

/* One descriptor per line, `#` comments; see blacklists/default.txt. */
dxp_status dxp_blacklist_parse(const char* text, dxp_blacklist** out);
void dxp_blacklist_free(dxp_blacklist* blacklist);
size_t dxp_blacklist_count(const dxp_blacklist* blacklist);
/* Duplicate-line warnings; empty list when clean. */
dxp_status dxp_blacklist_warnings(const dxp_blacklist* blacklist, dxp_strlist** out);

/* ---- patching ---- */

/* Rewrites every blacklisted call site to invoke-static on a generated
 * stub. stub_class NULL = "Lru/innopolis/Stub;". With zero matching
 * sites *out is the input dex unchanged and no stub class is added. */
dxp_status dxp_patch(const dxp_dex* dex, const dxp_blacklist* blacklist,
                     const char* stub_class, dxp_dex** out, dxp_report** out_report);

uint32_t dxp_report_patched_sites(const dxp_report* report);
uint32_t dxp_report_scanned_methods(const dxp_report* report);
uint32_t dxp_report_scanned_instructions(const dxp_report* report);
/* Returned strings live as long as the report. */
const char* dxp_report_text(const dxp_report* report);
const char* dxp_report_tsv(const dxp_report* report);
void dxp_report_free(dxp_report* report);

/* ---- apk ---- */

/* Full pipeline on an APK file: open, extract classes.dex, patch, repack
 * with META-INF stripped, write apk_out. apk_out NULL = dry run (patch and
 * report, write nothing). Multidex APKs and APKs without classes.dex fail
 * with DXP_E_PATCH. The output archive is unsigned. */
dxp_status dxp_apk_patch_file(const char* apk_in, const char* apk_out,
                              const char* blacklist_text, const char* stub_class,
                              dxp_report** out_report);

#ifdef __cplusplus
}
#endif

#endif /* DEXPATCH_H */
